// Writes a synthetic scenario ensemble in the ingestion CSV format.
//
//   make_fixture <out.csv> [count] [seed]

#include <fmt/format.h>

#include <cstdlib>
#include <iostream>

#include "transition_league/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixture <out.csv> [count] [seed]\n";
    return 2;
  }
  tl::SyntheticOptions o;
  if (argc > 2) o.count = std::strtoull(argv[2], nullptr, 10);
  if (argc > 3) o.seed = std::strtoull(argv[3], nullptr, 10);
  try {
    const auto set = tl::synthetic_ensemble(o);
    tl::save_scenarios(argv[1], set);
    std::cout << fmt::format("wrote {} scenarios to {}\n", set.size(), argv[1]);
  } catch (const tl::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
