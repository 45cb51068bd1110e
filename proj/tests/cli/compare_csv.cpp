// compare_csv GOLDEN ACTUAL [tol]
// compare_csv --crc FILE
//
// Line-by-line comparison of two relqm CSV files. Manifest lines must agree
// in command and params; cells match as strings or as numbers within tol
// (absolute below 1, relative above).

#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<std::string> read_lines(const char* path) {
  std::ifstream f(path);
  if (!f) {
    std::cerr << "cannot open " << path << '\n';
    std::exit(2);
  }
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

bool same_cell(const std::string& a, const std::string& b, double tol) {
  if (a == b) return true;
  char *ea = nullptr, *eb = nullptr;
  const double x = std::strtod(a.c_str(), &ea), y = std::strtod(b.c_str(), &eb);
  if (a.empty() || b.empty() || *ea || *eb) return false;
  return std::abs(x - y) <= tol * std::max(1.0, std::abs(x));
}

bool same_manifest(const std::string& a, const std::string& b) {
  try {
    const auto x = nlohmann::json::parse(a.substr(1)), y = nlohmann::json::parse(b.substr(1));
    return x.at("command") == y.at("command") && x.at("params") == y.at("params");
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

// The manifest checksum covers every byte after the manifest line.
int check_crc(const char* path) {
  std::ifstream f(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto nl = text.find('\n');
  if (!f.good() && !f.eof()) return 2;
  if (nl == std::string::npos || text[0] != '#') return 1;
  boost::crc_32_type crc;
  crc.process_bytes(text.data() + nl + 1, text.size() - nl - 1);
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
  try {
    const auto m = nlohmann::json::parse(text.substr(1, nl - 1));
    if (m.at("crc32") == hex) return 0;
    std::cerr << "crc32 " << hex << ", manifest says " << m.at("crc32") << '\n';
  } catch (const nlohmann::json::exception& e) {
    std::cerr << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--crc") return check_crc(argv[2]);
  if (argc < 3) {
    std::cerr << "usage: compare_csv GOLDEN ACTUAL [tol]\n";
    return 2;
  }
  const double tol = argc > 3 ? std::atof(argv[3]) : 1e-12;
  const auto g = read_lines(argv[1]), a = read_lines(argv[2]);
  if (g.size() != a.size()) {
    std::cerr << "line count " << a.size() << ", expected " << g.size() << '\n';
    return 1;
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool comment = !g[i].empty() && g[i][0] == '#';
    if (i == 0 && comment) {
      if (!same_manifest(g[i], a[i])) {
        std::cerr << "manifest differs:\n  " << g[i] << "\n  " << a[i] << '\n';
        return 1;
      }
      continue;
    }
    std::vector<std::string> cg, ca;
    if (comment) {
      // "# key=value key=value"
      std::stringstream sg(g[i]), sa(a[i]);
      for (std::string t; sg >> t;) cg.push_back(t.substr(t.find('=') + 1));
      for (std::string t; sa >> t;) ca.push_back(t.substr(t.find('=') + 1));
    } else {
      cg = split(g[i]);
      ca = split(a[i]);
    }
    bool ok = cg.size() == ca.size();
    for (std::size_t k = 0; ok && k < cg.size(); ++k) ok = same_cell(cg[k], ca[k], tol);
    if (!ok) {
      std::cerr << "line " << i + 1 << " differs:\n  expected " << g[i] << "\n  actual   " << a[i] << '\n';
      return 1;
    }
  }
  return 0;
}
