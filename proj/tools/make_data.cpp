// Regenerates the bundled files under data/ from the built-in setups.
//
//   tlsf_make_data <data-dir>

#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>

#include "tlsf/io.hpp"
#include "tlsf/sim.hpp"

namespace fs = std::filesystem;
using namespace tlsf;

namespace {

// Experiment JSON with the model(s) referenced by relative path.
void save_with_model_paths(const fs::path& p, const Experiment& e, const std::vector<std::string>& model_files) {
  Json j = to_json(e);
  if (model_files.size() == 1) {
    j["model"] = model_files.front();
  } else {
    j["model"] = model_files;
  }
  write_text(p, j.dump(2) + "\n");
}

// Two scalar signals on x for the two-predicate example, dt 0.1 over
// [0, 8.5]. S1 reaches the middle of A inside [2,4] and stays clear of B
// afterwards; S2 does the same but dips to 0.30 around t = 6.
Signal example_signal(bool dip) {
  const double dt = 0.1;
  std::vector<double> x;
  for (int i = 0; i <= 85; ++i) {
    const double t = dt * i;
    double v;
    if (t <= 2.0) {
      v = 0.25 * t;  // 0 -> 0.5
    } else if (t <= 4.0) {
      v = 0.5;
    } else if (!dip) {
      v = 0.5 + 0.0125 * std::min(t - 4.0, 4.0);  // -> 0.55
    } else if (t <= 6.0) {
      v = 0.5 - 0.1 * (t - 4.0);  // -> 0.30
    } else if (t <= 8.0) {
      v = 0.3 + 0.1 * (t - 6.0);  // back to 0.5
    } else {
      v = 0.5;
    }
    x.push_back(std::round(v * 1e6) / 1e6);
  }
  Signal s(dt);
  s.add_channel("x", std::move(x));
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: tlsf_make_data <data-dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir / "models");

  save_model(dir / "models/reach.json", reach_model());
  save_model(dir / "models/pick.json", pick_model());
  save_model(dir / "models/insert.json", insert_model());
  write_demo_csv(dir / "reach_demo.csv", reach_demo());

  save_with_model_paths(dir / "phi1.json", build_phi1(), {"models/reach.json"});
  save_with_model_paths(dir / "phi2.json", build_phi2(), {"models/reach.json"});
  save_with_model_paths(dir / "phi3.json", build_phi3(), {"models/pick.json", "models/insert.json"});

  StlSpec ex;
  ex.stl = "F[2,4](A) and G[2,8](not B)";
  ex.predicates.emplace("A", Predicate::band("A", "x", 0.4, 0.6));
  ex.predicates.emplace("B", Predicate::band("B", "x", 0.15, 0.35));
  write_text(dir / "two_predicates.json", to_json(ex).dump(2) + "\n");
  write_signal_csv(dir / "S1.csv", example_signal(false));
  write_signal_csv(dir / "S2.csv", example_signal(true));

  fmt::print("wrote {}\n", dir.string());
  return 0;
}
