#include "relqm/am/half_int.hpp"

#include <charconv>
#include <cstdlib>
#include <string>

#include "relqm/errors.hpp"

namespace relqm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, int& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

HalfInt HalfInt::parse(std::string_view text) {
  const std::string_view s = trim(text);
  const auto slash = s.find('/');
  int num = 0;
  if (slash == std::string_view::npos) {
    if (!parse_int(s, num)) {
      throw DomainError("malformed half-integer '" + std::string(text) + "'");
    }
    return from_int(num);
  }
  int den = 0;
  if (!parse_int(s.substr(0, slash), num) || !parse_int(s.substr(slash + 1), den) ||
      (den != 1 && den != 2)) {
    throw DomainError("malformed half-integer '" + std::string(text) +
                      "' (expected n or n/2)");
  }
  return den == 1 ? from_int(num) : from_twice(num);
}

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }

void require_spin(HalfInt j, std::string_view what) {
  if (j.twice() < 0) {
    throw DomainError(std::string(what) + ": negative spin " + j.str());
  }
}

void require_projection(HalfInt m, HalfInt j, std::string_view what) {
  require_spin(j, what);
  if (!is_projection_of(m, j)) {
    throw DomainError(std::string(what) + ": m=" + m.str() +
                      " is not a projection of j=" + j.str());
  }
}

std::vector<HalfInt> projections(HalfInt j) {
  std::vector<HalfInt> out;
  out.reserve(static_cast<std::size_t>(j.multiplicity()));
  for (int t = j.twice(); t >= -j.twice(); t -= 2) out.push_back(HalfInt::from_twice(t));
  return out;
}

std::vector<HalfInt> coupled_spins(HalfInt j1, HalfInt j2) {
  std::vector<HalfInt> out;
  const int lo = std::abs(j1.twice() - j2.twice());
  for (int t = j1.twice() + j2.twice(); t >= lo; t -= 2) out.push_back(HalfInt::from_twice(t));
  return out;
}

}  // namespace relqm
