// Deterministic stand-in for an external pair scorer.
// usage: topseg-stub-scorer score --pairs <in> --out <out>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

static std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

int main(int argc, char** argv) {
  std::string pairs, out;
  for (int i = 1; i + 1 < argc; ++i) {
    std::string a = argv[i];
    if (a == "--pairs") pairs = argv[++i];
    else if (a == "--out") out = argv[++i];
  }
  if (argc < 2 || std::string(argv[1]) != "score" || pairs.empty() || out.empty()) {
    std::cerr << "usage: topseg-stub-scorer score --pairs <in> --out <out>\n";
    return 1;
  }
  std::ifstream in(pairs);
  if (!in) { std::cerr << "cannot open " << pairs << "\n"; return 3; }
  std::ofstream os(out, std::ios::binary);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string key = j.at("a").at("text").get<std::string>() + '\x1f' + j.at("b").at("text").get<std::string>();
      const double prob = static_cast<double>(fnv1a(key) >> 11) * 0x1.0p-53;
      os << nlohmann::json{{"pair_id", j.at("pair_id")}, {"prob", prob}}.dump() << '\n';
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "line " << n << ": " << e.what() << "\n";
      return 2;
    }
  }
}
