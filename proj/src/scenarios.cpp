#include "ils/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include <boost/random/uniform_real_distribution.hpp>
#include "json.hpp"

#include "ils/io.hpp"
#include "ils/tangent.hpp"

namespace ils {

namespace {

IntegrationConfig deterministic(IntegrationConfig cfg) {
  cfg.scheme = Scheme::rk4_deterministic;
  return cfg;
}

long long steps_for(double duration, double dt) { return std::llround(duration / dt); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += std::to_string(v[k]);
  }
  return out;
}

}  // namespace

EnsembleState draw_initial_state(const ModelParams& params, const InitialBox& box,
                                 std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  boost::random::uniform_real_distribution<double> ux(box.x_lo, box.x_hi);
  boost::random::uniform_real_distribution<double> uy(box.y_lo, box.y_hi);
  boost::random::uniform_real_distribution<double> uz(box.z_lo, box.z_hi);
  EnsembleState s(params.n_osc);
  for (std::size_t i = 0; i < params.n_osc; ++i) {
    s.x[i] = ux(engine);
    s.y[i] = uy(engine);
    s.z[i] = uz(engine);
  }
  return s;
}

void integrate(RingStepper& stepper, EnsembleState& state, double duration,
               const std::function<void(const EnsembleState&)>& observer) {
  const long long n = steps_for(duration, stepper.config().dt);
  for (long long k = 0; k < n; ++k) {
    stepper.step(state);
    if (observer) observer(state);
  }
}

EnsembleState prepare_start(const RunConfig& cfg) {
  EnsembleState s = draw_initial_state(cfg.model, cfg.box, cfg.seeds.init_state);
  if (cfg.t0_after_transient && cfg.transient > 0.0) {
    RingStepper stepper(cfg.model, deterministic(cfg.integration));
    integrate(stepper, s, cfg.transient);
  }
  return s;
}

const IlsProfile* TangentPhase::at_horizon(double horizon) const {
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (horizons[k] == horizon) return &profiles[k];
  }
  return nullptr;
}

bool TangentPhase::boundaries_stable() const {
  return std::all_of(boundary_history.begin(), boundary_history.end(),
                     [&](const auto& b) { return b.size() == boundary_history.front().size(); });
}

TangentPhase run_tangent_phase(const RunConfig& cfg, const EnsembleState& start) {
  TangentPhase out;
  out.t0 = start.t;
  out.start = start;
  out.horizons = cfg.checkpoints;
  out.horizons.push_back(cfg.reference_horizon);
  std::sort(out.horizons.begin(), out.horizons.end());
  out.horizons.erase(std::unique(out.horizons.begin(), out.horizons.end()), out.horizons.end());
  out.reference_index = static_cast<std::size_t>(
      std::find(out.horizons.begin(), out.horizons.end(), cfg.reference_horizon) -
      out.horizons.begin());

  const double dt = cfg.integration.dt;
  const std::size_t n = cfg.model.n_osc;
  const long long delta_every = std::max(1LL, steps_for(cfg.delta_stride, dt));
  const long long space_every = std::max(1LL, steps_for(cfg.spacetime_stride, dt));
  const long long space_last = steps_for(cfg.spacetime_duration, dt);
  const long long snap_every = std::max(1LL, steps_for(cfg.boundary_snapshot_spacing, dt));
  const long long snap_last = snap_every * static_cast<long long>(cfg.boundary_snapshots);

  RingStepper stepper(cfg.model, deterministic(cfg.integration));
  EnsembleState state = start;
  TangentState ts = init_homogeneous(n, cfg.seeds.init_tangent, out.t0);
  RingTangentEvolution evo(stepper, state, cfg.renorm_interval);
  IncoherenceAccumulator delta(n, static_cast<std::size_t>(delta_every));

  out.boundary_history.push_back(detect_boundaries(start));
  if (space_last > 0) out.spacetime.push_back({start.t, start.x});
  evo.set_observer([&](const EnsembleState& s) {
    const long long k = evo.steps_done();
    if (k % delta_every == 0) delta.add(s, cfg.delta_component);
    if (k <= space_last && k % space_every == 0) out.spacetime.push_back({s.t, s.x});
    if (k < snap_last && k % snap_every == 0) out.boundary_history.push_back(detect_boundaries(s));
  });

  TangentAdvance advance = [&](TangentState& t, double horizon) {
    evo.advance(t, horizon);
    out.profiles.push_back(ils_profile(t, horizon));
    if (out.profiles.back().decayed > 0) {
      out.warnings.push_back(std::to_string(out.profiles.back().decayed) +
                             " oscillator projections decayed to zero at T=" + format_real(horizon));
    }
  };
  out.le = max_le_estimate(ts, out.horizons, advance);
  if (delta.samples() > 0) out.delta = delta.result();
  out.end = state;
  return out;
}

IncoherenceProfile run_uniform_noise(const RunConfig& cfg, const EnsembleState& start) {
  const auto spec = cfg.noise_spec();
  if (!spec || cfg.noise_mode != NoiseMode::uniform) {
    throw std::invalid_argument("uniform noise run needs a uniform noise configuration");
  }
  RingStepper stepper(cfg.model, cfg.integration);
  NoiseStream stream(spec->seed);
  const double dt = cfg.integration.dt_stochastic;
  const long long total = steps_for(cfg.noise_run, dt);
  const long long every = std::max(1LL, steps_for(cfg.delta_stride, dt));
  IncoherenceAccumulator acc(cfg.model.n_osc, static_cast<std::size_t>(every));
  EnsembleState s = start;
  for (long long k = 0; k < total; ++k) {
    stepper.step_stochastic(s, *spec, stream, static_cast<double>(k) * dt, dt);
    if ((k + 1) % every == 0) acc.add(s, cfg.delta_component);
  }
  return acc.result();
}

std::optional<double> LocalizedNoiseResult::median_decay(const std::string& region) const {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.region == region && !r.diverged) v.push_back(r.result.decay_time);
  }
  if (v.empty()) return std::nullopt;
  return median(std::move(v));
}

std::vector<std::pair<std::string, RegionSpec>> localized_windows(const RunConfig& cfg,
                                                                   const Regions& regions,
                                                                   std::vector<std::string>* warnings) {
  const std::size_t n = cfg.model.n_osc;
  std::vector<std::pair<std::string, RegionSpec>> out;
  if (cfg.noise_i1) {
    out.emplace_back("window", RegionSpec{RegionLabel::I, *cfg.noise_i1, *cfg.noise_i2, n});
    return out;
  }
  if (regions.has_low()) {
    out.emplace_back("I", RegionSpec::window(RegionLabel::I, regions.low->center(), cfg.noise_width, n));
  } else if (warnings) {
    warnings->push_back("regime lacks region I; no localized noise applied there");
  }
  if (regions.has_high()) {
    out.emplace_back("II", RegionSpec::window(RegionLabel::II, regions.high->center(), cfg.noise_width, n));
  } else if (warnings) {
    warnings->push_back("regime lacks region II; no localized noise applied there");
  }
  return out;
}

namespace {

// One run of the paired protocol. The observer sees (noise-clock time, state)
// at every sample, starting with the unperturbed state at time 0.
void localized_run(const RunConfig& cfg, const EnsembleState& start, const NoiseSpec& noise,
                   const std::function<void(double, const EnsembleState&)>& observer) {
  RingStepper noisy(cfg.model, cfg.integration);
  RingStepper smooth(cfg.model, deterministic(cfg.integration));
  NoiseStream stream(noise.seed);
  EnsembleState s = start;
  observer(0.0, s);
  const double dts = cfg.integration.dt_stochastic;
  const long long noisy_steps = steps_for(cfg.noise_tn, dts);
  for (long long k = 0; k < noisy_steps; ++k) {
    noisy.step_stochastic(s, noise, stream, static_cast<double>(k) * dts, dts);
  }
  const double t_noise = static_cast<double>(noisy_steps) * dts;
  const double dt = cfg.integration.dt;
  const long long every = std::max(1LL, steps_for(cfg.persistence_sample, dt));
  const long long total = steps_for(cfg.persistence_horizon - t_noise, dt);
  observer(t_noise, s);
  for (long long k = 1; k <= total; ++k) {
    smooth.step(s);
    if (k % every == 0) observer(t_noise + static_cast<double>(k) * dt, s);
  }
}

}  // namespace

LocalizedNoiseResult run_localized_noise(const RunConfig& cfg, const EnsembleState& start,
                                         const Regions& regions) {
  LocalizedNoiseResult out;
  const auto windows = localized_windows(cfg, regions, &out.warnings);
  if (windows.empty()) return out;

  std::vector<double> times;
  std::vector<EnsembleState> reference;
  NoiseSpec quiet = NoiseSpec::localized(0.0, 1, 1, cfg.noise_tn, cfg.seeds.noise);
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  localized_run(cfg, start, quiet, [&](double t, const EnsembleState& s) {
    times.push_back(t);
    reference.push_back(s);
    const auto [lo, hi] = std::minmax_element(s.x.begin(), s.x.end());
    x_lo = std::min(x_lo, *lo);
    x_hi = std::max(x_hi, *hi);
  });
  out.threshold = cfg.persistence_threshold ? *cfg.persistence_threshold : 0.01 * (x_hi - x_lo);

  const long long field_every =
      std::max(1LL, std::llround(cfg.spacetime_stride / cfg.persistence_sample));
  for (const auto& [name, window] : windows) {
    for (std::size_t r = 0; r < cfg.noise_realizations; ++r) {
      const std::uint64_t seed = cfg.seeds.noise + r;
      NoiseSpec spec = NoiseSpec::localized(cfg.noise_d, window.lo, window.hi, cfg.noise_tn, seed);
      spec.shared_component_noise = cfg.shared_component_noise;
      std::vector<double> dist;
      dist.reserve(times.size());
      DifferenceField field{name, {}};
      const bool want_field = r == 0 && cfg.spacetime_duration > 0.0;
      std::size_t k = 0;
      try {
        localized_run(cfg, start, spec, [&](double t, const EnsembleState& s) {
          dist.push_back(region_distance(reference[k], s, window));
          if (want_field && t <= cfg.spacetime_duration &&
              static_cast<long long>(k) % field_every == 0) {
            SpacetimeSample sample{t, std::vector<double>(s.size())};
            for (std::size_t i = 0; i < s.size(); ++i) sample.x[i] = std::abs(s.x[i] - reference[k].x[i]);
            field.samples.push_back(std::move(sample));
          }
          ++k;
        });
      } catch (const DivergenceError& e) {
        out.records.push_back({name, window, seed, {times.back(), false}, true});
        out.warnings.push_back("region " + name + ", noise seed " + std::to_string(seed) + ": " + e.what());
        continue;
      }
      out.records.push_back(
          {name, window, seed,
           persistence_from_distances(times, dist, out.threshold, cfg.persistence_hold)});
      if (want_field) out.fields.push_back(std::move(field));
    }
  }
  return out;
}

namespace {

class OutputSet {
 public:
  OutputSet(std::filesystem::path dir, ScenarioResult& result) : dir_(std::move(dir)), result_(result) {}

  CsvWriter open(const std::string& name, std::initializer_list<std::string_view> header) {
    return CsvWriter(dir_ / name, header);
  }
  void done(CsvWriter& w) {
    w.close();
    result_.outputs.emplace_back(w.path().filename().string(), w.rows());
  }

 private:
  std::filesystem::path dir_;
  ScenarioResult& result_;
};

void write_snapshot_csv(OutputSet& out, const EnsembleState& s) {
  // Accumulated step times carry rounding noise; name the file by the time
  // rounded to 1e-6.
  auto w = out.open("snapshot_t" + format_real(std::round(s.t * 1e6) / 1e6) + ".csv",
                    {"i", "x", "y", "z"});
  for (std::size_t i = 0; i < s.size(); ++i) {
    w << i + 1 << s.x[i] << s.y[i] << s.z[i];
    w.end_row();
  }
  out.done(w);
}

void write_tangent_outputs(OutputSet& out, const TangentPhase& tp) {
  {
    auto w = out.open("ils_profile.csv", {"T", "i", "lambda_i", "s_i"});
    for (const auto& p : tp.profiles) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        w << p.horizon << i + 1 << p.lambda_i[i] << p.s_i[i];
        w.end_row();
      }
    }
    out.done(w);
  }
  {
    auto w = out.open("le_series.csv", {"T", "lambda", "r_ils"});
    for (const auto& p : tp.profiles) {
      w << p.horizon << p.lambda_full << p.r_ils;
      w.end_row();
    }
    out.done(w);
  }
  write_snapshot_csv(out, tp.start);
  write_snapshot_csv(out, tp.end);
  if (!tp.spacetime.empty()) {
    auto w = out.open("spacetime.csv", {"t", "i", "x"});
    for (const auto& s : tp.spacetime) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        w << s.t << i + 1 << s.x[i];
        w.end_row();
      }
    }
    out.done(w);
  }
}

void write_delta(OutputSet& out, const IncoherenceProfile& d) {
  auto w = out.open("delta_profile.csv", {"i", "delta_i"});
  for (std::size_t i = 0; i < d.delta_i.size(); ++i) {
    w << i + 1 << d.delta_i[i];
    w.end_row();
  }
  out.done(w);
}

void write_localized(OutputSet& out, const LocalizedNoiseResult& loc, const Regions& regions) {
  {
    auto w = out.open("persistence.csv", {"region", "seed", "decay_time"});
    for (const auto& r : loc.records) {
      w << r.region << static_cast<std::size_t>(r.seed);
      if (r.diverged) {
        w << std::string_view("nan");
      } else {
        w << r.result.decay_time;
      }
      w.end_row();
    }
    out.done(w);
  }
  {
    auto w = out.open("regions.csv", {"region", "label", "i_lo", "i_hi", "decay_time"});
    auto row = [&](const std::string& name, std::string_view label, const RegionSpec& r) {
      w << name << label << r.lo << r.hi;
      if (const auto d = loc.median_decay(name)) {
        w << *d;
      } else {
        w << std::string_view("");
      }
      w.end_row();
    };
    if (regions.low) row("I", "low_ils", *regions.low);
    if (regions.high) row("II", "high_ils", *regions.high);
    std::vector<std::string> done;
    for (const auto& r : loc.records) {
      if (std::find(done.begin(), done.end(), r.region) != done.end()) continue;
      done.push_back(r.region);
      row(r.region, "noise_window", r.window);
    }
    out.done(w);
  }
  for (const auto& f : loc.fields) {
    auto w = out.open("difference_" + f.region + ".csv", {"t", "i", "dx"});
    for (const auto& s : f.samples) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        w << s.t << i + 1 << s.x[i];
        w.end_row();
      }
    }
    out.done(w);
  }
}

nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(to_config_text(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

nlohmann::json region_json(const RegionSpec& r) { return {{"i_lo", r.lo}, {"i_hi", r.hi}}; }

void write_manifest(const std::filesystem::path& dir, const ScenarioResult& res) {
  nlohmann::json j;
  j["artifact"] = "ils-lab";
  j["artifact_version"] = kArtifactVersion;
  j["status"] = res.completed ? "completed" : "failed";
  if (!res.completed) j["failure"] = res.failure;
  j["runtime_seconds"] = res.runtime_seconds;
  j["config"] = config_json(res.config);
  j["preset"] = config_json(preset(res.config.scenario));
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, rows] : res.outputs) files.push_back({{"file", name}, {"rows", rows}});
  j["outputs"] = files;
  j["log"] = res.log;

  nlohmann::json results = nlohmann::json::object();
  if (res.tangent) {
    const auto& tp = *res.tangent;
    results["t0"] = tp.t0;
    results["lambda_max"] = tp.le.lambda_max;
    results["lambda_max_horizon"] = tp.le.horizon_used;
    results["lambda_stabilization"] = tp.le.stabilization;
    results["reference_horizon"] = tp.reference().horizon;
    results["reference_r_ils"] = tp.reference().r_ils;
    double worst = 0.0;
    for (const auto& p : tp.profiles) worst = std::max(worst, p.identity_residual);
    results["max_identity_residual"] = worst;
    results["boundaries"] = tp.boundaries();
    results["boundaries_stable"] = tp.boundaries_stable();
  }
  if (res.regions.low) results["region_I"] = region_json(*res.regions.low);
  if (res.regions.high) results["region_II"] = region_json(*res.regions.high);
  if (res.localized) {
    results["persistence_threshold"] = res.localized->threshold;
    for (const std::string name : {"I", "II", "window"}) {
      if (const auto d = res.localized->median_decay(name)) {
        results["median_decay_time_" + name] = *d;
      }
    }
  }
  j["results"] = results;
  write_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

ScenarioResult run_scenario(const RunConfig& cfg) {
  cfg.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  ScenarioResult res;
  res.config = cfg;
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  OutputSet out(dir, res);

  try {
    const EnsembleState start = prepare_start(cfg);
    res.log.push_back("t0 = " + format_real(start.t));

    res.tangent = run_tangent_phase(cfg, start);
    const auto& tp = *res.tangent;
    for (const auto& w : tp.warnings) res.log.push_back("warning: " + w);
    write_tangent_outputs(out, tp);
    res.log.push_back("boundaries at t0: " + join(tp.boundaries()));
    if (!tp.boundaries_stable()) res.log.push_back("warning: boundary count changes across snapshots");

    res.regions = extract_regions(tp.reference(), tp.le.lambda_max, tp.boundaries());
    if (!res.regions.has_low()) res.log.push_back("regime lacks region I");
    if (!res.regions.has_high()) res.log.push_back("regime lacks region II");

    if (cfg.noise_mode == NoiseMode::uniform && cfg.noise_d > 0.0) {
      res.delta = run_uniform_noise(cfg, start);
    } else {
      res.delta = tp.delta;
    }
    if (res.delta) write_delta(out, *res.delta);

    if (cfg.noise_mode == NoiseMode::localized && cfg.noise_d > 0.0) {
      res.localized = run_localized_noise(cfg, start, res.regions);
      for (const auto& w : res.localized->warnings) res.log.push_back(w);
      write_localized(out, *res.localized, res.regions);
    }
    res.completed = true;
  } catch (const DivergenceError& e) {
    res.failure = e.what();
    res.log.push_back(std::string("divergence: ") + e.what());
  }
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  write_manifest(dir, res);
  return res;
}

std::vector<ScenarioResult> run_sweep(const RunConfig& cfg, std::uint64_t first, std::uint64_t last,
                                      unsigned threads) {
  if (last < first) throw std::invalid_argument("seed range is empty");
  cfg.validate();
  const std::size_t count = static_cast<std::size_t>(last - first + 1);
  std::vector<ScenarioResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      RunConfig c = cfg;
      const std::uint64_t seed = first + k;
      c.seeds.init_state = seed;
      c.seeds.init_tangent = seed;
      c.seeds.noise = seed;
      c.output_dir = (std::filesystem::path(cfg.output_dir) / ("seed_" + std::to_string(seed))).string();
      try {
        results[k] = run_scenario(c);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

RegimeProbe probe_regime(const RunConfig& cfg, std::uint64_t seed, RegimeTarget target,
                         double window) {
  RunConfig c = cfg;
  c.seeds.init_state = seed;
  c.checkpoints = {window};
  c.horizon = window;
  c.reference_horizon = window;
  c.spacetime_duration = 0.0;
  c.noise_mode = NoiseMode::none;
  c.noise_d = 0.0;
  c.integration.scheme = Scheme::rk4_deterministic;
  const EnsembleState start = prepare_start(c);
  const TangentPhase tp = run_tangent_phase(c, start);

  RegimeProbe probe;
  probe.seed = seed;
  probe.boundaries = tp.boundaries();
  probe.lambda_full = tp.le.lambda_max;
  const auto& delta = tp.delta->delta_i;
  probe.incoherent = incoherent_clusters(delta, default_incoherence_threshold(delta));
  if (target == RegimeTarget::two_cluster) {
    probe.matches = probe.boundaries.size() == 2 && tp.boundaries_stable() &&
                    probe.lambda_full > kChaosThreshold;
  } else {
    probe.matches = !probe.incoherent.empty();
  }
  return probe;
}

}  // namespace ils
