#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relqm/composite/density.hpp"
#include "relqm/errors.hpp"
#include "relqm/maps/channels.hpp"

using namespace relqm;

namespace {

HalfInt h(int twice) { return HalfInt::from_twice(twice); }

ParticleSystem system_of(const std::vector<int>& twice_spins) {
  std::vector<Particle> ps;
  const char* names[] = {"A", "B", "C", "D", "E", "F"};
  for (std::size_t k = 0; k < twice_spins.size(); ++k) ps.push_back({names[k], h(twice_spins[k])});
  return ParticleSystem(ps);
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// (alpha|up> + beta|down>) (x) |G,G>
DensityOperator measured_state(int tG, std::complex<double> a, std::complex<double> b) {
  const ParticleSystem sys({{"S", h(1)}, {"G", h(tG)}});
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(sys.dimension());
  psi(0) = a;
  psi(tG + 1) = b;
  return pure_state(sys, psi);
}

Eigen::MatrixXcd embed_op(const std::vector<int>& spins, std::size_t k, const Eigen::MatrixXcd& op) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t q = 0; q < spins.size(); ++q)
    acc = oracle::kron(acc, q == k ? op : Eigen::MatrixXcd::Identity(spins[q] + 1, spins[q] + 1));
  return acc;
}

// Sum of c_ij J_i . J_j over all pairs with random real couplings.
Eigen::MatrixXcd heisenberg(const std::vector<int>& spins, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int dim = 1;
  for (int t : spins) dim *= t + 1;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < spins.size(); ++i) {
    for (std::size_t j = i + 1; j < spins.size(); ++j) {
      const auto si = oracle::spin_matrices(spins[i]), sj = oracle::spin_matrices(spins[j]);
      H += u(rng) * (embed_op(spins, i, si.x) * embed_op(spins, j, sj.x) + embed_op(spins, i, si.y) * embed_op(spins, j, sj.y) +
                     embed_op(spins, i, si.z) * embed_op(spins, j, sj.z));
    }
  }
  return H;
}

// Integer combination of the prefix Casimirs (J_1+...+J_k)^2: rotation
// invariant, with a spectrum in quarter-integers so T = 8 pi is a period.
Eigen::MatrixXcd casimir_chain(const std::vector<int>& spins, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-3, 3);
  int dim = 1;
  for (int t : spins) dim *= t + 1;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t k = 2; k <= spins.size(); ++k) {
    Eigen::MatrixXcd jx = Eigen::MatrixXcd::Zero(dim, dim), jy = jx, jz = jx;
    for (std::size_t i = 0; i < k; ++i) {
      const auto s = oracle::spin_matrices(spins[i]);
      jx += embed_op(spins, i, s.x);
      jy += embed_op(spins, i, s.y);
      jz += embed_op(spins, i, s.z);
    }
    H += static_cast<double>(c(rng)) * (jx * jx + jy * jy + jz * jz);
  }
  return H;
}

// Random element of the commutant of total J: sum_J 1_{m_J} (x) A_J.
DensityOperator random_invariant(const IrrepDecomposition& dec, std::mt19937_64& rng) {
  const int dim = dec.basis().dimension();
  Eigen::MatrixXcd rc = Eigen::MatrixXcd::Zero(dim, dim);
  for (const IrrepSector& s : dec.sectors()) {
    const Eigen::MatrixXcd a = oracle::random_density(rng, s.n_mult);
    for (int p = 0; p < s.n_mult; ++p)
      for (int q = 0; q < s.n_mult; ++q)
        for (int m = 0; m < s.m_dim; ++m) rc(s.offsets[p] + m, s.offsets[q] + m) = a(p, q);
  }
  rc /= rc.trace().real();
  return DensityOperator(dec.basis(), dec.map().to_source(rc));
}

double commutator_with_j(const DensityOperator& rho) {
  const oracle::SpinMatrices j = [&] {
    std::vector<int> spins;
    for (const Factor& f : rho.basis().factors()) spins.push_back(f.leaf_spins().front().twice());
    return oracle::total_spin(spins);
  }();
  const Eigen::MatrixXcd& r = rho.matrix();
  return std::max({max_abs(r * j.x - j.x * r), max_abs(r * j.y - j.y * r), max_abs(r * j.z - j.z * r)});
}

}  // namespace

TEST_SUITE("decompose_su2") {
  TEST_CASE("textbook examples") {
    const IrrepDecomposition two = decompose_su2(system_of({1, 1}));
    REQUIRE(two.sectors().size() == 2);
    CHECK(two.sectors()[0].J == h(2));
    CHECK(two.sectors()[0].m_dim == 3);
    CHECK(two.sectors()[0].n_mult == 1);
    CHECK(two.sectors()[1].J == h(0));
    CHECK(two.sectors()[1].n_mult == 1);

    const IrrepDecomposition three = decompose_su2(system_of({1, 1, 1}));
    REQUIRE(three.sectors().size() == 2);
    CHECK(three.sectors()[0].J == h(3));
    CHECK(three.sectors()[0].n_mult == 1);
    CHECK(three.sectors()[1].J == h(1));
    CHECK(three.sectors()[1].n_mult == 2);

    for (int tG : {1, 4, 11}) {
      const IrrepDecomposition sg = decompose_su2(ParticleSystem({{"S", h(1)}, {"G", h(tG)}}));
      REQUIRE(sg.sectors().size() == 2);
      CHECK(sg.sectors()[0].J == h(tG + 1));
      CHECK(sg.sectors()[1].J == h(tG - 1));
      CHECK(sg.sectors()[0].n_mult == 1);
      CHECK(sg.sectors()[1].n_mult == 1);
    }
  }

  TEST_CASE("multiplicities match the spectrum of total J^2") {
    for (const auto& spins : std::vector<std::vector<int>>{{1, 1, 1}, {2, 3, 1}, {3, 3, 2}, {1, 1, 1, 1}}) {
      const IrrepDecomposition dec = decompose_su2(system_of(spins));
      const oracle::SpinMatrices tot = oracle::total_spin(spins);
      const Eigen::VectorXd ev =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(tot.x * tot.x + tot.y * tot.y + tot.z * tot.z).eigenvalues();
      for (const IrrepSector& s : dec.sectors()) {
        const double target = s.J.casimir();
        const auto count = ((ev.array() - target).abs() < 1e-9).count();
        CHECK(count == s.m_dim * s.n_mult);
      }
      // isometries: orthonormal columns, jointly complete
      Eigen::MatrixXd all(dec.basis().dimension(), 0);
      for (int k = 0; k < static_cast<int>(dec.sectors().size()); ++k) {
        const Eigen::MatrixXd iso = dec.isometry(k);
        Eigen::MatrixXd grown(all.rows(), all.cols() + iso.cols());
        grown << all, iso;
        all = grown;
      }
      REQUIRE(all.cols() == all.rows());
      CHECK((all.transpose() * all - Eigen::MatrixXd::Identity(all.rows(), all.rows())).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("dimension bound") {
    CHECK_THROWS_AS(decompose_su2(system_of({20, 20, 20})), DimensionError);
  }
}

TEST_SUITE("rotation_twirl") {
  TEST_CASE("measured state reproduces the parallel/antiparallel rule") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int tG : {1, 10, 41}) {
      for (int trial = 0; trial < 5; ++trial) {
        std::complex<double> a{g(rng), g(rng)}, b{g(rng), g(rng)};
        const double n = std::sqrt(std::norm(a) + std::norm(b));
        a /= n;
        b /= n;
        const DensityOperator rho = measured_state(tG, a, b);
        const IrrepDecomposition dec = decompose_su2(ParticleSystem({{"S", h(1)}, {"G", h(tG)}}));
        const PhysicalState ps = rotation_twirl(rho, dec);
        const double G = 0.5 * tG;
        CHECK(ps.find(h(tG + 1))->probability == doctest::Approx(std::norm(a) + std::norm(b) / (2 * G + 1)).epsilon(1e-12));
        CHECK(ps.find(h(tG - 1))->probability == doctest::Approx(2 * G * std::norm(b) / (2 * G + 1)).epsilon(1e-12));
        CHECK(ps.total_probability() == doctest::Approx(1.0).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("down-up pair splits evenly between singlet and triplet") {
    const PhysicalState ps = rotation_twirl(measured_state(1, 0.0, 1.0), decompose_su2(ParticleSystem({{"S", h(1)}, {"G", h(1)}})));
    CHECK(ps.find(h(2))->probability == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ps.find(h(0))->probability == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("empty sectors are absent, not NaN") {
    const PhysicalState ps = rotation_twirl(measured_state(4, 1.0, 0.0), decompose_su2(ParticleSystem({{"S", h(1)}, {"G", h(4)}})));
    CHECK(ps.sectors.size() == 1);
    CHECK(ps.find(h(3)) == nullptr);
  }

  TEST_CASE("invariant states are fixed points") {
    std::mt19937_64 rng(2);
    const IrrepDecomposition dec = decompose_su2(system_of({1, 2, 3}));
    for (int trial = 0; trial < 5; ++trial) {
      const DensityOperator inv = random_invariant(dec, rng);
      CHECK(max_abs(twirl(inv, dec).matrix() - inv.matrix()) <= 1e-12);
      CHECK(commutator_with_j(inv) <= 1e-12);
    }
  }

  TEST_CASE("extract_noiseless round trip") {
    std::mt19937_64 rng(4);
    const IrrepDecomposition dec = decompose_su2(system_of({1, 1, 2}));
    const DensityOperator rho(dec.basis(), oracle::random_density(rng, dec.basis().dimension()));
    const PhysicalState ps = rotation_twirl(rho, dec);
    const PhysicalState again = extract_noiseless(rotation_twirl(embed(ps, dec), dec));
    REQUIRE(again.sectors.size() == ps.sectors.size());
    for (std::size_t k = 0; k < ps.sectors.size(); ++k) {
      CHECK(again.sectors[k].probability == doctest::Approx(ps.sectors[k].probability).epsilon(1e-12));
      CHECK(max_abs(again.sectors[k].state - ps.sectors[k].state) <= 1e-12);
    }
    const PhysicalState single = extract_noiseless(rotation_twirl(measured_state(1, 1.0, 0.0), decompose_su2(ParticleSystem({{"S", h(1)}, {"G", h(1)}}))));
    REQUIRE(single.sectors.size() == 1);
    CHECK(single.sectors[0].probability == doctest::Approx(1.0));
    PhysicalState broken = ps;
    broken.sectors[0].probability += 0.1;
    CHECK_THROWS_AS(extract_noiseless(broken), StateError);
  }

  TEST_CASE("coherent J=0 projection differs from the statistical twirl") {
    // Comparison only: the coherent group average keeps just the singlet.
    const DensityOperator rho = measured_state(1, 0.0, 1.0);
    const IrrepDecomposition dec = decompose_su2(ParticleSystem({{"S", h(1)}, {"G", h(1)}}));
    const Eigen::MatrixXd singlet = dec.isometry(dec.find(h(0)));
    const Eigen::MatrixXcd p0 = (singlet * singlet.transpose()).cast<std::complex<double>>();
    const double p_coherent = (p0 * rho.matrix() * p0).trace().real();
    CHECK(p_coherent == doctest::Approx(0.5));
    CHECK(rotation_twirl(rho, dec).sectors.size() == 2);
  }
}

TEST_SUITE("rotation_twirl_oracle") {
  TEST_CASE("two spin-1/2 random pure state at resolution 32") {
    std::mt19937_64 rng(8);
    const ParticleSystem sys = system_of({1, 1});
    const DensityOperator rho = pure_state(sys, oracle::random_state(rng, 4));
    const DensityOperator q = rotation_twirl_oracle(rho, 32);
    CHECK(max_abs(q.matrix() - twirl(rho, decompose_su2(sys)).matrix()) <= 1e-8);
  }

  TEST_CASE("single spin-1 twirls to the identity") {
    const ParticleSystem sys = system_of({2});
    Eigen::VectorXcd top = Eigen::VectorXcd::Zero(3);
    top(0) = 1.0;
    const DensityOperator q = rotation_twirl_oracle(pure_state(sys, top), 8);
    CHECK(max_abs(q.matrix() - Eigen::MatrixXcd::Identity(3, 3) / 3.0) <= 1e-12);
    CHECK_THROWS_AS(rotation_twirl_oracle(pure_state(sys, top), 7), DomainError);
  }

  TEST_CASE("agrees with the Schur twirl on all 2-3 particle systems, spins <= 3/2") {
    std::mt19937_64 rng(12);
    double worst = 0.0;
    for (int a = 1; a <= 3; ++a)
      for (int b = a; b <= 3; ++b) {
        for (int c = 0; c <= 3; ++c) {
          std::vector<int> spins{a, b};
          if (c > 0) {
            if (c < b) continue;
            spins.push_back(c);
          }
          const ParticleSystem sys = system_of(spins);
          const DensityOperator rho(BasisDescriptor::product(sys), oracle::random_density(rng, sys.dimension()));
          const DensityOperator q = rotation_twirl_oracle(rho, 16);
          worst = std::max(worst, max_abs(q.matrix() - twirl(rho, decompose_su2(sys)).matrix()));
        }
      }
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("invariant states are unchanged") {
    std::mt19937_64 rng(13);
    const IrrepDecomposition dec = decompose_su2(system_of({2, 1}));
    const DensityOperator inv = random_invariant(dec, rng);
    CHECK(max_abs(rotation_twirl_oracle(inv, 8).matrix() - inv.matrix()) <= 1e-12);
  }
}

TEST_SUITE("channel properties") {
  TEST_CASE("trace preserving, unital, idempotent") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> spin(1, 3), count(1, 3);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<int> spins;
      for (int k = count(rng); k > 0; --k) spins.push_back(spin(rng));
      const IrrepDecomposition dec = decompose_su2(system_of(spins));
      const int dim = dec.basis().dimension();
      const DensityOperator rho(dec.basis(), oracle::random_density(rng, dim));
      const PhysicalState ps = rotation_twirl(rho, dec);
      CHECK(std::abs(ps.total_probability() - 1.0) <= 1e-11);
      const DensityOperator once = embed(ps, dec);
      CHECK(max_abs(twirl(once, dec).matrix() - once.matrix()) <= 1e-11);
      const DensityOperator mixed(dec.basis(), Eigen::MatrixXcd::Identity(dim, dim) / dim);
      CHECK(max_abs(twirl(mixed, dec).matrix() - mixed.matrix()) <= 1e-11);
    }
  }

  TEST_CASE("non-invariant states are moved and fail to commute with J") {
    std::mt19937_64 rng(19);
    const IrrepDecomposition dec = decompose_su2(system_of({1, 2, 2}));
    for (int trial = 0; trial < 5; ++trial) {
      const DensityOperator rho(dec.basis(), oracle::random_density(rng, dec.basis().dimension()));
      CHECK(max_abs(twirl(rho, dec).matrix() - rho.matrix()) > 1e-3);
      CHECK(commutator_with_j(rho) > 1e-3);
      CHECK(commutator_with_j(twirl(rho, dec)) <= 1e-11);
    }
  }

  TEST_CASE("trace and twirl commute") {
    std::mt19937_64 rng(23);
    for (int ta = 1; ta <= 4; ++ta)
      for (int tb = 1; tb <= 4; ++tb) {
        const ParticleSystem ab = system_of({ta, tb});
        const DensityOperator rho(BasisDescriptor::product(ab), oracle::random_density(rng, ab.dimension()));
        const DensityOperator lhs = partial_trace(twirl(rho, decompose_su2(ab)), {"B"});
        const DensityOperator rhs = twirl(partial_trace(rho, {"B"}), decompose_su2(system_of({ta})));
        CHECK(max_abs(lhs.matrix() - rhs.matrix()) <= 1e-10);
      }
  }
}

TEST_SUITE("time_average") {
  TEST_CASE("examples") {
    const BasisDescriptor b = BasisDescriptor::product(system_of({2}));
    const Eigen::VectorXd e = (Eigen::VectorXd(3) << 1.0, 0.0, -1.0).finished();
    const Eigen::MatrixXcd H = e.cast<std::complex<double>>().asDiagonal();
    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(3, 3);
    diag(0, 0) = 0.25;
    diag(2, 2) = 0.75;
    const DensityOperator rd(b, diag);
    CHECK(max_abs(time_average(rd, H).matrix() - diag) <= 1e-15);

    Eigen::VectorXcd sup = Eigen::VectorXcd::Zero(3);
    sup(0) = sup(1) = 1 / std::sqrt(2.0);
    const DensityOperator out = time_average(pure_state(b, sup), H);
    CHECK(std::abs(out.matrix()(0, 1)) <= 1e-15);
    CHECK(out.matrix()(0, 0).real() == doctest::Approx(0.5));
    CHECK(out.matrix()(1, 1).real() == doctest::Approx(0.5));
  }

  TEST_CASE("strict period mode") {
    const BasisDescriptor b = BasisDescriptor::product(system_of({2}));
    Eigen::VectorXcd sup = Eigen::VectorXcd::Ones(3) / std::sqrt(3.0);
    const DensityOperator rho = pure_state(b, sup);
    const Eigen::VectorXd comm = (Eigen::VectorXd(3) << 2.0, 1.0, -3.0).finished();
    TimeAverageOptions strict{TimeAverageMode::strict_period, 2.0 * std::numbers::pi};
    CHECK(max_abs(time_average_diagonal(rho, comm, strict).matrix() - time_average_diagonal(rho, comm).matrix()) <= 1e-15);
    const Eigen::VectorXd incomm = (Eigen::VectorXd(3) << std::sqrt(2.0), 1.0, -3.0).finished();
    CHECK_THROWS_AS(time_average_diagonal(rho, incomm, strict), IncommensurateSpectrumError);
    CHECK_NOTHROW(time_average_diagonal(rho, incomm));
    CHECK(gaps_commensurate(comm, 2.0 * std::numbers::pi));
    CHECK_FALSE(gaps_commensurate(incomm, 2.0 * std::numbers::pi));
  }

  TEST_CASE("output commutes with H") {
    std::mt19937_64 rng(29);
    for (const auto& spins : std::vector<std::vector<int>>{{1, 1}, {1, 2, 3}, {2, 2, 1, 1}}) {
      const ParticleSystem sys = system_of(spins);
      const Eigen::MatrixXcd H = heisenberg(spins, rng);
      const DensityOperator rho(BasisDescriptor::product(sys), oracle::random_density(rng, sys.dimension()));
      const DensityOperator out = time_average(rho, H);
      CHECK(max_abs(out.matrix() * H - H * out.matrix()) <= 1e-11);
    }
  }

  TEST_CASE("full dephasing equals the one-period integral for commensurate spectra") {
    std::mt19937_64 rng(30);
    for (const auto& spins : std::vector<std::vector<int>>{{1, 1}, {1, 2, 3}, {2, 2, 1, 1}}) {
      const ParticleSystem sys = system_of(spins);
      const Eigen::MatrixXcd H = casimir_chain(spins, rng);
      const DensityOperator rho(BasisDescriptor::product(sys), oracle::random_density(rng, sys.dimension()));
      const DensityOperator out = time_average(rho, H);
      const double period = 8.0 * std::numbers::pi;
      const TimeAverageOptions strict{TimeAverageMode::strict_period, period};
      CHECK(max_abs(time_average(rho, H, strict).matrix() - out.matrix()) <= 1e-12);
      // The rectangle rule over one period is exact for trigonometric
      // polynomials of degree below the node count.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
      const double spread = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
      const int steps = 2 * static_cast<int>(std::ceil(spread * period / (2.0 * std::numbers::pi))) + 8;
      Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(sys.dimension(), sys.dimension());
      for (int k = 0; k < steps; ++k) {
        const double t = period * k / steps;
        Eigen::VectorXcd ph(sys.dimension());
        for (int i = 0; i < ph.size(); ++i) ph(i) = std::polar(1.0, -t * es.eigenvalues()(i));
        const Eigen::MatrixXcd u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        avg += u * rho.matrix() * u.adjoint();
      }
      avg /= steps;
      CHECK(max_abs(avg - out.matrix()) <= 1e-10);
    }
  }

  TEST_CASE("twirl and time average commute for rotation-invariant H") {
    std::mt19937_64 rng(31);
    for (const auto& spins : std::vector<std::vector<int>>{{1, 2, 1}, {2, 2, 3}, {1, 1, 1, 1}}) {
      const ParticleSystem sys = system_of(spins);
      const IrrepDecomposition dec = decompose_su2(sys);
      const Eigen::MatrixXcd H = heisenberg(spins, rng);
      const DensityOperator rho(dec.basis(), oracle::random_density(rng, sys.dimension()));
      const DensityOperator et = twirl(time_average(rho, H), dec);
      const DensityOperator te = time_average(twirl(rho, dec), H);
      CHECK(max_abs(et.matrix() - te.matrix()) <= 1e-10);
    }
  }

  TEST_CASE("errors") {
    const BasisDescriptor b = BasisDescriptor::product(system_of({1}));
    const DensityOperator rho(b, Eigen::MatrixXcd::Identity(2, 2) / 2.0);
    CHECK_THROWS_AS(time_average(rho, Eigen::MatrixXcd::Identity(3, 3)), DimensionError);
    Eigen::MatrixXcd bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(time_average(rho, bad), DomainError);
    CHECK_THROWS_AS(time_average(rho, Eigen::MatrixXcd::Identity(2, 2), TimeAverageOptions{TimeAverageMode::strict_period, 0.0}),
                    DomainError);
  }
}

TEST_SUITE("conditional_update") {
  TEST_CASE("examples") {
    const std::complex<double> a = 0.6, b = {0.0, 0.8};
    const int tG = 9;
    const IrrepDecomposition dec = decompose_su2(ParticleSystem({{"S", h(1)}, {"G", h(tG)}}));
    const PhysicalState ps = rotation_twirl(measured_state(tG, a, b), dec);

    const ConditionalResult all = conditional_update(ps, [](HalfInt, const CouplingPath&) { return true; });
    CHECK(all.probability == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(all.state.sectors.size() == ps.sectors.size());

    const ConditionalResult par = conditional_update(ps, [&](HalfInt J, const CouplingPath&) { return J == h(tG + 1); });
    CHECK(par.probability == doctest::Approx(0.36 + 0.64 / (tG + 1)).epsilon(1e-12));
    CHECK(par.state.sectors.size() == 1);
    CHECK(par.state.sectors[0].probability == doctest::Approx(1.0));

    const PhysicalState up = rotation_twirl(measured_state(tG, 1.0, 0.0), dec);
    CHECK_THROWS_AS(conditional_update(up, [&](HalfInt J, const CouplingPath&) { return J == h(tG - 1); }), NullEventError);
  }

  TEST_CASE("selecting intermediate labels is the von Neumann rule") {
    std::mt19937_64 rng(37);
    const ParticleSystem sys = system_of({1, 2, 2});
    const IrrepDecomposition dec = decompose_su2(sys);  // ((A,B),C)
    const DensityOperator rho(dec.basis(), oracle::random_density(rng, sys.dimension()));
    const PhysicalState ps = rotation_twirl(rho, dec);
    auto sel = [](HalfInt, const CouplingPath& p) { return p.front() == HalfInt::from_twice(3); };  // J_AB = 3/2
    const ConditionalResult res = conditional_update(ps, sel);
    // oracle: projector onto J_AB = 3/2 from the coupled columns, applied to the twirled state
    Eigen::MatrixXd cols(sys.dimension(), 0);
    const Eigen::MatrixXd u(dec.map().matrix());
    const Factor& f = dec.map().target().factor(0);
    for (int c = 0; c < u.cols(); ++c) {
      if (f.irrep_path(f.irrep_of_state(c)).front() != HalfInt::from_twice(3)) continue;
      cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
      cols.col(cols.cols() - 1) = u.col(c);
    }
    const Eigen::MatrixXcd P = (cols * cols.transpose()).cast<std::complex<double>>();
    const Eigen::MatrixXcd tw = twirl(rho, dec).matrix();
    const double p = (P * tw * P).trace().real();
    CHECK(res.probability == doctest::Approx(p).epsilon(1e-12));
    const DensityOperator updated = embed(res.state, dec);
    CHECK(max_abs(updated.matrix() - P * tw * P / p) <= 1e-12);
  }
}
