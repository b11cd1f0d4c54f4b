#include <cstdint>
#include <iostream>
#include <optional>
#include <regex>
#include <string>

#include "CLI11.hpp"
#include "ils/config.hpp"
#include "ils/io.hpp"
#include "ils/scenarios.hpp"

namespace {

void print_summary(const ils::ScenarioResult& r) {
  std::cout << "output: " << r.config.output_dir << "\n";
  std::cout << "status: " << (r.completed ? "completed" : "failed") << "\n";
  if (!r.completed) std::cout << "failure: " << r.failure << "\n";
  if (r.tangent) {
    const auto& tp = *r.tangent;
    std::cout << "lambda_max: " << ils::format_real(tp.le.lambda_max) << " (T="
              << ils::format_real(tp.le.horizon_used) << ")\n";
    std::cout << "r_ils at T=" << ils::format_real(tp.reference().horizon) << ": "
              << ils::format_real(tp.reference().r_ils) << "\n";
    std::cout << "boundaries:";
    for (auto b : tp.boundaries()) std::cout << ' ' << b;
    std::cout << "\n";
  }
  if (r.regions.low) std::cout << "region I: " << r.regions.low->lo << ".." << r.regions.low->hi << "\n";
  if (r.regions.high) {
    std::cout << "region II: " << r.regions.high->lo << ".." << r.regions.high->hi << "\n";
  }
  if (r.localized) {
    for (const std::string name : {"I", "II", "window"}) {
      if (auto d = r.localized->median_decay(name)) {
        std::cout << "median decay time " << name << ": " << ils::format_real(*d) << "\n";
      }
    }
  }
  for (const auto& line : r.log) std::cerr << "log: " << line << "\n";
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  static const std::regex re(R"(^\s*(\d+)\s*\.\.\s*(\d+)\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw CLI::ValidationError("--seeds", "expected A..B");
  const auto a = std::stoull(m[1]);
  const auto b = std::stoull(m[2]);
  if (b < a) throw CLI::ValidationError("--seeds", "range is empty");
  return {a, b};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Index of local sensitivity for rings of coupled Rossler oscillators"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_state, seed_tangent, seed_noise;
  std::optional<std::string> out_dir;

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config_path, "Run-config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed-state", seed_state, "Seed for the initial conditions");
  run->add_option("--seed-tangent", seed_tangent, "Seed for the initial perturbation");
  run->add_option("--seed-noise", seed_noise, "Seed for the noise");
  run->add_option("--out", out_dir, "Output directory");

  std::string seeds;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario for a range of seeds");
  sweep->add_option("--config", config_path, "Run-config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seeds", seeds, "Seed range A..B")->required();
  sweep->add_option("--threads", threads, "Concurrent runs (0 = all cores)");
  sweep->add_option("--out", out_dir, "Output directory");

  std::string target_name;
  std::uint64_t first_seed = 1;
  std::uint64_t seed_count = 20;
  std::size_t stop_after = 1;
  double window = 1000.0;
  auto* find = app.add_subcommand("find-regime", "Scan seeds for a regime");
  find->add_option("--config", config_path, "Run-config file")->required()->check(CLI::ExistingFile);
  find->add_option("--target", target_name, "two-cluster or chimera (default from scenario)")
      ->check(CLI::IsMember({"two-cluster", "chimera"}));
  find->add_option("--first", first_seed, "First seed to try");
  find->add_option("--count", seed_count, "Number of seeds to try");
  find->add_option("--stop-after", stop_after, "Stop after this many matches (0 = never)");
  find->add_option("--window", window, "Observation window after the transient");

  std::string scenario_name;
  auto* show = app.add_subcommand("config", "Print a fully resolved config");
  auto* show_cfg = show->add_option("--config", config_path, "Run-config file")->check(CLI::ExistingFile);
  show->add_option("--scenario", scenario_name, "Scenario preset")->excludes(show_cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (show->parsed()) {
      const auto cfg = !config_path.empty()
                           ? ils::parse_config(config_path)
                           : ils::preset(ils::scenario_from_string(scenario_name.empty() ? "custom"
                                                                                         : scenario_name));
      std::cout << ils::to_config_text(cfg);
      return 0;
    }

    auto cfg = ils::parse_config(config_path);
    if (seed_state) cfg.seeds.init_state = *seed_state;
    if (seed_tangent) cfg.seeds.init_tangent = *seed_tangent;
    if (seed_noise) cfg.seeds.noise = *seed_noise;
    if (out_dir) cfg.output_dir = *out_dir;
    cfg.validate();

    if (run->parsed()) {
      const auto res = ils::run_scenario(cfg);
      print_summary(res);
      return res.completed ? 0 : 2;
    }

    if (sweep->parsed()) {
      const auto [a, b] = parse_range(seeds);
      const auto results = ils::run_sweep(cfg, a, b, threads);
      std::filesystem::create_directories(cfg.output_dir);
      ils::CsvWriter w(std::filesystem::path(cfg.output_dir) / "sweep_summary.csv",
                       {"seed", "status", "lambda_max", "boundaries", "r_ils"});
      bool all_ok = true;
      for (const auto& r : results) {
        all_ok = all_ok && r.completed;
        w << static_cast<std::size_t>(r.config.seeds.init_state)
          << std::string_view(r.completed ? "completed" : "failed");
        if (r.tangent) {
          w << r.tangent->le.lambda_max << r.tangent->boundaries().size()
            << r.tangent->reference().r_ils;
        } else {
          w << std::string_view("") << std::string_view("") << std::string_view("");
        }
        w.end_row();
      }
      w.close();
      std::cout << "ran " << results.size() << " seeds into " << cfg.output_dir << "\n";
      return all_ok ? 0 : 2;
    }

    if (find->parsed()) {
      ils::RegimeTarget target = ils::RegimeTarget::two_cluster;
      if (target_name == "chimera" ||
          (target_name.empty() && (cfg.scenario == ils::ScenarioKind::phase_chimera ||
                                   cfg.scenario == ils::ScenarioKind::amplitude_chimera))) {
        target = ils::RegimeTarget::chimera;
      }
      std::size_t matches = 0;
      std::cout << "seed,matches,lambda,boundaries,incoherent_clusters\n";
      for (std::uint64_t s = first_seed; s < first_seed + seed_count; ++s) {
        const auto p = ils::probe_regime(cfg, s, target, window);
        std::cout << s << ',' << (p.matches ? "yes" : "no") << ','
                  << ils::format_real(p.lambda_full) << ',';
        for (std::size_t k = 0; k < p.boundaries.size(); ++k) {
          std::cout << (k ? " " : "") << p.boundaries[k];
        }
        std::cout << ',';
        for (std::size_t k = 0; k < p.incoherent.size(); ++k) {
          std::cout << (k ? " " : "") << p.incoherent[k].lo << ".." << p.incoherent[k].hi;
        }
        std::cout << std::endl;
        if (p.matches && ++matches == stop_after) break;
      }
      return matches > 0 ? 0 : 3;
    }
  } catch (const ils::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
