// License: Apache 2.0. See LICENSE file in root directory.
//
// Command-line front end: match / eval / synth / noise / predict / postproc.
// Every subcommand prints one JSON report to stdout (stderr carries
// diagnostics), accepts --config <json> with flags taking precedence, and
// writes output files atomically so a failed run never leaves partial files.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "censtereo/censtereo.hpp"

using json = nlohmann::ordered_json;
using namespace censtereo;

namespace {

// ---------------------------------------------------------------------------
// Atomic output staging: everything is rendered to memory first, written to
// temporaries, and renamed into place only after every file succeeded.
// ---------------------------------------------------------------------------

class OutputStager {
 public:
  void add(const std::string& path, std::string bytes) {
    if (path.empty()) throw std::runtime_error("empty output path");
    staged_.emplace_back(path, std::move(bytes));
  }

  void commit() {
    std::vector<std::string> temps;
    try {
      for (const auto& [path, bytes] : staged_) {
        const std::string tmp = path + ".tmp";
        detail::write_file(tmp, bytes);
        temps.push_back(tmp);
      }
      for (size_t i = 0; i < staged_.size(); ++i)
        std::filesystem::rename(temps[i], staged_[i].first);
    } catch (...) {
      for (const std::string& t : temps) {
        std::error_code ec;
        std::filesystem::remove(t, ec);
      }
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> staged_;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Disparity rasters travel as PFM (pixels, +inf = invalid) or 16-bit PGM
// (raw 1/32-px fixed point); pick by extension.
std::string encode_disparity(const std::string& path, const DisparityMap& d) {
  if (ends_with(path, ".pfm")) return encode_pfm(disparity_to_real(d));
  if (ends_with(path, ".pgm")) {
    GrayImage img(d.width, d.height, 16);
    img.samples.assign(d.values.begin(), d.values.end());
    return encode_pgm(img);
  }
  throw std::runtime_error("disparity output must end in .pfm or .pgm: " + path);
}

DisparityMap read_disparity(const std::string& path) {
  if (ends_with(path, ".pfm")) return real_to_disparity(read_pfm(path));
  if (ends_with(path, ".pgm")) return read_disparity_pgm(path);
  throw std::runtime_error("disparity input must end in .pfm or .pgm: " + path);
}

// ---------------------------------------------------------------------------
// Config file: JSON that mirrors the library types. Unknown keys anywhere
// are an error so typos cannot silently change a run.
// ---------------------------------------------------------------------------

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!j.is_object())
    throw std::runtime_error("config: " + where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (key == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::runtime_error("config: unknown key \"" + key + "\" in " + where);
  }
}

struct Config {
  bool loaded = false;
  json j;  // validated config document

  bool has(const char* block, const char* key) const {
    return loaded && j.contains(block) && j[block].contains(key);
  }
};

Config load_config(const std::string& path) {
  Config cfg;
  if (path.empty()) return cfg;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw std::runtime_error("config: " + std::string(e.what()));
  }
  reject_unknown(j, {"seed", "threads", "rig", "preset", "thresholds", "noise",
                     "scene", "postproc"},
                 "top level");
  if (j.contains("rig"))
    reject_unknown(j["rig"],
                   {"fx", "fy", "cx", "cy", "baseline", "k1", "k2", "k3", "p1",
                    "p2", "model"},
                   "rig");
  if (j.contains("thresholds"))
    reject_unknown(j["thresholds"],
                   {"min_score_enabled", "min_score", "max_score_enabled",
                    "max_score", "lr_enabled", "lr_max", "neighbor_enabled",
                    "neighbor_min", "second_peak_enabled", "second_peak_min",
                    "texture_enabled", "texture_count_min", "texture_diff",
                    "median_enabled", "median_offset", "median_percentile",
                    "median_step"},
                   "thresholds");
  if (j.contains("noise"))
    reject_unknown(j["noise"],
                   {"blur_enabled", "photon_enabled", "read_enabled",
                    "blur_sigma", "full_well", "read_sigma"},
                   "noise");
  if (j.contains("scene"))
    reject_unknown(j["scene"],
                   {"width", "height", "bit_depth", "z", "a", "b", "c",
                    "dot_density", "dot_radius", "contrast"},
                   "scene");
  if (j.contains("postproc")) {
    reject_unknown(j["postproc"], {"chain"}, "postproc");
    if (j["postproc"].contains("chain")) {
      if (!j["postproc"]["chain"].is_array())
        throw std::runtime_error("config: postproc.chain must be an array");
      for (const json& link : j["postproc"]["chain"]) {
        reject_unknown(link,
                       {"filter", "max_region_size", "similarity_tol", "window",
                        "step"},
                       "postproc.chain entry");
        if (!link.contains("filter"))
          throw std::runtime_error("config: postproc.chain entry needs \"filter\"");
      }
    }
  }
  cfg.loaded = true;
  cfg.j = std::move(j);
  return cfg;
}

template <typename T>
T config_get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad value type for " + where + "." + key);
  }
}

StereoRig rig_from_config(const Config& cfg) {
  StereoRig rig;
  // documented defaults: a 480x360 rig with fB = 42 m*px
  rig.intrinsics.fx = 600.0;
  rig.intrinsics.fy = 600.0;
  rig.intrinsics.cx = 239.5;
  rig.intrinsics.cy = 179.5;
  rig.baseline = 0.07;
  if (!cfg.loaded || !cfg.j.contains("rig")) return rig;
  const json& r = cfg.j["rig"];
  Intrinsics& in = rig.intrinsics;
  if (r.contains("fx")) in.fx = config_get<double>(r, "fx", "rig");
  if (r.contains("fy")) in.fy = config_get<double>(r, "fy", "rig");
  if (r.contains("cx")) in.cx = config_get<double>(r, "cx", "rig");
  if (r.contains("cy")) in.cy = config_get<double>(r, "cy", "rig");
  if (r.contains("baseline"))
    rig.baseline = config_get<double>(r, "baseline", "rig");
  if (r.contains("k1")) in.k1 = config_get<double>(r, "k1", "rig");
  if (r.contains("k2")) in.k2 = config_get<double>(r, "k2", "rig");
  if (r.contains("k3")) in.k3 = config_get<double>(r, "k3", "rig");
  if (r.contains("p1")) in.p1 = config_get<double>(r, "p1", "rig");
  if (r.contains("p2")) in.p2 = config_get<double>(r, "p2", "rig");
  if (r.contains("model")) {
    const std::string m = config_get<std::string>(r, "model", "rig");
    if (m == "none")
      in.model = DistortionModel::None;
    else if (m == "modified_brown_conrady")
      in.model = DistortionModel::ModifiedBrownConrady;
    else
      throw std::runtime_error("config: rig.model must be \"none\" or "
                               "\"modified_brown_conrady\"");
  }
  rig.validate();
  return rig;
}

void apply_threshold_overrides(Thresholds& t, const json& o) {
  const auto geti = [&](const char* k) { return config_get<int>(o, k, "thresholds"); };
  const auto getb = [&](const char* k) { return config_get<bool>(o, k, "thresholds"); };
  if (o.contains("min_score_enabled")) t.min_score_enabled = getb("min_score_enabled");
  if (o.contains("min_score")) t.min_score = geti("min_score");
  if (o.contains("max_score_enabled")) t.max_score_enabled = getb("max_score_enabled");
  if (o.contains("max_score")) t.max_score = geti("max_score");
  if (o.contains("lr_enabled")) t.lr_enabled = getb("lr_enabled");
  if (o.contains("lr_max")) t.lr_max = geti("lr_max");
  if (o.contains("neighbor_enabled")) t.neighbor_enabled = getb("neighbor_enabled");
  if (o.contains("neighbor_min")) t.neighbor_min = geti("neighbor_min");
  if (o.contains("second_peak_enabled"))
    t.second_peak_enabled = getb("second_peak_enabled");
  if (o.contains("second_peak_min")) t.second_peak_min = geti("second_peak_min");
  if (o.contains("texture_enabled")) t.texture_enabled = getb("texture_enabled");
  if (o.contains("texture_count_min")) t.texture_count_min = geti("texture_count_min");
  if (o.contains("texture_diff")) t.texture_diff = geti("texture_diff");
  if (o.contains("median_enabled")) t.median_enabled = getb("median_enabled");
  if (o.contains("median_offset")) t.median_offset = geti("median_offset");
  if (o.contains("median_percentile"))
    t.median_percentile = config_get<double>(o, "median_percentile", "thresholds");
  if (o.contains("median_step"))
    t.median_step = config_get<double>(o, "median_step", "thresholds");
}

json thresholds_to_json(const Thresholds& t) {
  json o;
  o["min_score_enabled"] = t.min_score_enabled;
  o["min_score"] = t.min_score;
  o["max_score_enabled"] = t.max_score_enabled;
  o["max_score"] = t.max_score;
  o["lr_enabled"] = t.lr_enabled;
  o["lr_max"] = t.lr_max;
  o["neighbor_enabled"] = t.neighbor_enabled;
  o["neighbor_min"] = t.neighbor_min;
  o["second_peak_enabled"] = t.second_peak_enabled;
  o["second_peak_min"] = t.second_peak_min;
  o["texture_enabled"] = t.texture_enabled;
  o["texture_count_min"] = t.texture_count_min;
  o["texture_diff"] = t.texture_diff;
  o["median_enabled"] = t.median_enabled;
  o["median_offset"] = t.median_offset;
  o["median_percentile"] = t.median_percentile;
  o["median_step"] = t.median_step;
  return o;
}

// ---------------------------------------------------------------------------
// Shared per-subcommand options.
// ---------------------------------------------------------------------------

struct CommonOpts {
  std::string config_path;
  uint64_t seed = 1;
  int threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON config file; explicit flags take precedence");
    seed_opt = sub->add_option("--seed", seed, "PRNG seed (default 1)");
    threads_opt =
        sub->add_option("--threads", threads,
                        "worker threads; results are thread-count independent")
            ->check(CLI::Range(1, 1024));
  }

  // flag > config > default
  Config resolve() {
    Config cfg = load_config(config_path);
    if (cfg.loaded && seed_opt->count() == 0 && cfg.j.contains("seed"))
      seed = config_get<uint64_t>(cfg.j, "seed", "top level");
    if (cfg.loaded && threads_opt->count() == 0 && cfg.j.contains("threads")) {
      threads = config_get<int>(cfg.j, "threads", "top level");
      if (threads < 1 || threads > 1024)
        throw std::runtime_error("config: threads outside [1, 1024]");
    }
    return cfg;
  }
};

void emit(const json& report, const std::string& report_path,
          OutputStager& stager) {
  const std::string text = report.dump(2) + "\n";
  if (!report_path.empty()) stager.add(report_path, text);
  stager.commit();
  std::cout << text;
}

// ---------------------------------------------------------------------------
// match
// ---------------------------------------------------------------------------

struct MatchArgs {
  CommonOpts common;
  std::string left, right, out, raw_out, report;
  std::string preset = "medium";
  CLI::Option* preset_opt = nullptr;
};

void run_match(MatchArgs& a) {
  Config cfg = a.common.resolve();
  if (a.preset_opt->count() == 0 && cfg.loaded && cfg.j.contains("preset"))
    a.preset = config_get<std::string>(cfg.j, "preset", "top level");
  const PresetName preset = preset_from_string(a.preset);
  Thresholds th = preset_thresholds(preset);
  if (cfg.loaded && cfg.j.contains("thresholds"))
    apply_threshold_overrides(th, cfg.j["thresholds"]);

  const GrayImage left = read_pgm(a.left);
  const GrayImage right = read_pgm(a.right);
  const MatchResult res = match_stereo(left, right, th);

  long long matched = 0;
  for (uint16_t v : res.raw_disparity.values)
    if (v != kInvalidDisparity) ++matched;
  const long long valid = (long long)res.validity.count();

  json report;
  report["subcommand"] = "match";
  report["width"] = left.width;
  report["height"] = left.height;
  report["preset"] = preset_to_string(preset);
  report["thresholds"] = thresholds_to_json(th);
  report["matched_pixels"] = matched;
  report["valid_pixels"] = valid;
  report["valid_fraction"] =
      double(valid) / (double(left.width) * double(left.height));

  OutputStager stager;
  if (!a.out.empty()) stager.add(a.out, encode_disparity(a.out, res.disparity));
  if (!a.raw_out.empty())
    stager.add(a.raw_out, encode_disparity(a.raw_out, res.raw_disparity));
  emit(report, a.report, stager);
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  CommonOpts common;
  std::string pred, gt, mask, report;
};

void run_eval(EvalArgs& a) {
  (void)a.common.resolve();
  const DisparityMap pred = read_disparity(a.pred);
  const RealMap gt = read_pfm(a.gt);

  MetricsReport m;
  if (!a.mask.empty()) {
    const GrayImage mimg = read_pgm(a.mask);
    if (mimg.width != pred.width || mimg.height != pred.height)
      throw std::runtime_error("mask dimensions do not match the prediction");
    ValidityMask mask(mimg.width, mimg.height, false);
    for (int y = 0; y < mimg.height; ++y)
      for (int x = 0; x < mimg.width; ++x) mask.set(x, y, mimg.at(x, y) != 0);
    m = compute_metrics(pred, gt, mask);
  } else {
    m = compute_metrics(pred, gt);
  }

  json report;
  report["subcommand"] = "eval";
  report["width"] = pred.width;
  report["height"] = pred.height;
  report["bad05"] = m.bad05;
  report["bad10"] = m.bad10;
  report["bad20"] = m.bad20;
  report["bad40"] = m.bad40;
  report["a50"] = m.a50;
  report["avg_err"] = m.avg_err;
  report["rms_err"] = m.rms_err;
  report["validity"] = m.validity;
  report["evaluated_pixels"] = m.evaluated_pixels;
  report["valid_pixels"] = m.valid_pixels;

  OutputStager stager;
  emit(report, a.report, stager);
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  CommonOpts common;
  std::string out_left, out_right, out_gt, report;
  int width = 480, height = 360, bit_depth = 10;
  double a = 20.0, b = 0.0, c = 0.0, z = 1.0;
  double dot_density = 8.0, dot_radius = 1.2, contrast = 120.0;
  CLI::Option *w_opt = nullptr, *h_opt = nullptr, *depth_opt = nullptr;
  CLI::Option *a_opt = nullptr, *b_opt = nullptr, *c_opt = nullptr,
              *z_opt = nullptr;
  CLI::Option *dd_opt = nullptr, *dr_opt = nullptr, *ct_opt = nullptr;
};

void run_synth(SynthArgs& a) {
  Config cfg = a.common.resolve();
  const json scene_cfg =
      cfg.loaded && cfg.j.contains("scene") ? cfg.j["scene"] : json::object();
  const auto pick_d = [&](CLI::Option* opt, double flag_val, const char* key,
                          double dflt) {
    if (opt->count() > 0) return flag_val;
    if (scene_cfg.contains(key)) return config_get<double>(scene_cfg, key, "scene");
    return dflt;
  };
  const auto pick_i = [&](CLI::Option* opt, int flag_val, const char* key,
                          int dflt) {
    if (opt->count() > 0) return flag_val;
    if (scene_cfg.contains(key)) return config_get<int>(scene_cfg, key, "scene");
    return dflt;
  };

  PlaneScene s;
  s.rig = rig_from_config(cfg);
  s.width = pick_i(a.w_opt, a.width, "width", 480);
  s.height = pick_i(a.h_opt, a.height, "height", 360);
  s.bit_depth = pick_i(a.depth_opt, a.bit_depth, "bit_depth", 10);
  s.dot_density = pick_d(a.dd_opt, a.dot_density, "dot_density", 8.0);
  s.dot_radius = pick_d(a.dr_opt, a.dot_radius, "dot_radius", 1.2);
  s.contrast = pick_d(a.ct_opt, a.contrast, "contrast", 120.0);
  s.seed = a.common.seed;

  const bool flag_ramp =
      a.a_opt->count() > 0 || a.b_opt->count() > 0 || a.c_opt->count() > 0;
  const bool cfg_ramp = scene_cfg.contains("a") || scene_cfg.contains("b") ||
                        scene_cfg.contains("c");
  if (scene_cfg.contains("z") && cfg_ramp)
    throw std::runtime_error(
        "config: scene cannot give both z and ramp coefficients");
  if (a.z_opt->count() > 0) {
    s.use_depth = true;
    s.z0 = a.z;
  } else if (flag_ramp || cfg_ramp || !scene_cfg.contains("z")) {
    s.use_depth = false;
    s.a = pick_d(a.a_opt, a.a, "a", 20.0);
    s.b = pick_d(a.b_opt, a.b, "b", 0.0);
    s.c = pick_d(a.c_opt, a.c, "c", 0.0);
  } else {
    s.use_depth = true;
    s.z0 = config_get<double>(scene_cfg, "z", "scene");
  }

  const ScenePair pair = render_plane_pair(s);
  double ra, rb, rc;
  s.ramp(ra, rb, rc);
  double d_min = ra, d_max = ra;
  for (int cy = 0; cy <= 1; ++cy)
    for (int cx = 0; cx <= 1; ++cx) {
      const double d = ra + rb * (cx * (s.width - 1)) + rc * (cy * (s.height - 1));
      d_min = std::min(d_min, d);
      d_max = std::max(d_max, d);
    }

  json report;
  report["subcommand"] = "synth";
  report["width"] = s.width;
  report["height"] = s.height;
  report["bit_depth"] = s.bit_depth;
  report["seed"] = s.seed;
  report["ramp"] = {{"a", ra}, {"b", rb}, {"c", rc}};
  report["d_min"] = d_min;
  report["d_max"] = d_max;
  report["below_min_z"] = pair.below_min_z;

  OutputStager stager;
  if (!a.out_left.empty()) stager.add(a.out_left, encode_pgm(pair.left));
  if (!a.out_right.empty()) stager.add(a.out_right, encode_pgm(pair.right));
  if (!a.out_gt.empty()) stager.add(a.out_gt, encode_pfm(pair.gt));
  emit(report, a.report, stager);
}

// ---------------------------------------------------------------------------
// noise
// ---------------------------------------------------------------------------

struct NoiseArgs {
  CommonOpts common;
  std::string in, out, report;
  double blur_sigma = 0.6, full_well = 1500.0, read_sigma = 2.0;
  bool blur_on = true, photon_on = true, read_on = true;
  CLI::Option *bs_opt = nullptr, *fw_opt = nullptr, *rs_opt = nullptr;
  CLI::Option *b_on = nullptr, *p_on = nullptr, *r_on = nullptr;
};

void run_noise(NoiseArgs& a) {
  Config cfg = a.common.resolve();
  const json ncfg =
      cfg.loaded && cfg.j.contains("noise") ? cfg.j["noise"] : json::object();
  const auto pick_d = [&](CLI::Option* opt, double flag_val, const char* key,
                          double dflt) {
    if (opt->count() > 0) return flag_val;
    if (ncfg.contains(key)) return config_get<double>(ncfg, key, "noise");
    return dflt;
  };
  const auto pick_b = [&](CLI::Option* opt, bool flag_val, const char* key,
                          bool dflt) {
    if (opt->count() > 0) return flag_val;
    if (ncfg.contains(key)) return config_get<bool>(ncfg, key, "noise");
    return dflt;
  };

  NoiseParams p;
  p.blur_sigma = pick_d(a.bs_opt, a.blur_sigma, "blur_sigma", 0.6);
  p.full_well = pick_d(a.fw_opt, a.full_well, "full_well", 1500.0);
  p.read_sigma = pick_d(a.rs_opt, a.read_sigma, "read_sigma", 2.0);
  p.blur_enabled = pick_b(a.b_on, a.blur_on, "blur_enabled", true);
  p.photon_enabled = pick_b(a.p_on, a.photon_on, "photon_enabled", true);
  p.read_enabled = pick_b(a.r_on, a.read_on, "read_enabled", true);
  p.seed = a.common.seed;

  const GrayImage img = read_pgm(a.in);
  const GrayImage noisy = add_sensor_noise(img, p);

  json report;
  report["subcommand"] = "noise";
  report["width"] = img.width;
  report["height"] = img.height;
  report["bit_depth"] = img.bit_depth;
  report["seed"] = p.seed;
  report["blur_enabled"] = p.blur_enabled;
  report["blur_sigma"] = p.blur_sigma;
  report["photon_enabled"] = p.photon_enabled;
  report["full_well"] = p.full_well;
  report["read_enabled"] = p.read_enabled;
  report["read_sigma"] = p.read_sigma;

  OutputStager stager;
  if (!a.out.empty()) stager.add(a.out, encode_pgm(noisy));
  emit(report, a.report, stager);
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictArgs {
  // one CommonOpts per calculator: CLI11 binds flag storage per subcommand,
  // and flag-vs-config precedence needs the parsed subcommand's counts
  CommonOpts commons[6];
  std::string report;
  double d = 0.0, z = 0.0, eps_d = 0.08, fb = 0.0;
  double r95 = 0.0, albedo = 1.0, theta_target = 0.0, theta_fov = 0.0;
  double fps_ref = 0.0, fps = 0.0;
  std::vector<CLI::Option*> fb_opts;
  CLI::App *bias_cmd = nullptr, *error_cmd = nullptr, *range_cmd = nullptr,
           *framerate_cmd = nullptr, *depth_cmd = nullptr, *limits_cmd = nullptr;

  CommonOpts& parsed_common() {
    const CLI::App* cmds[6] = {bias_cmd,      error_cmd, range_cmd,
                               framerate_cmd, depth_cmd, limits_cmd};
    for (int i = 0; i < 6; ++i)
      if (cmds[i]->parsed()) return commons[i];
    throw std::logic_error("predict: no calculator parsed");
  }
};

void run_predict(PredictArgs& a) {
  Config cfg = a.parsed_common().resolve();
  const StereoRig rig = rig_from_config(cfg);
  bool fb_given = false;
  for (const CLI::Option* opt : a.fb_opts)
    if (opt->count() > 0) fb_given = true;
  const double fB = fb_given ? a.fb : rig.intrinsics.fx * rig.baseline;
  if (!(fB > 0.0)) throw std::runtime_error("fB must be positive");

  json report;
  report["subcommand"] = "predict";
  if (a.bias_cmd->parsed()) {
    report["calculator"] = "bias";
    report["input"] = {{"d", a.d}};
    report["formula"] = "bias = -d / (2*d^2 - 1)";
    report["bias"] = planar_bias(a.d);
  } else if (a.error_cmd->parsed()) {
    ErrorModel m;
    m.eps_d = a.eps_d;
    m.fB = fB;
    const DepthRms r = depth_rms(a.z, m);
    report["calculator"] = "error";
    report["input"] = {{"z", a.z}, {"eps_d", m.eps_d}, {"fB", m.fB}};
    report["formula"] = "eps_mm = z^2 * eps_d / fB; eps_pct = z * eps_d / fB";
    report["eps_mm"] = r.eps_mm;
    report["eps_pct"] = r.eps_pct;
  } else if (a.range_cmd->parsed()) {
    RangeScenario s;
    s.r95 = a.r95;
    s.albedo = a.albedo;
    s.theta_target = a.theta_target;
    s.theta_fov = a.theta_fov;
    report["calculator"] = "range";
    report["input"] = {{"r95", s.r95},
                       {"albedo", s.albedo},
                       {"theta_target", s.theta_target},
                       {"theta_fov", s.theta_fov}};
    report["formula"] =
        "range = r95 * sqrt(cos(theta_target) * albedo * cos(theta_fov)^7)";
    report["range"] = expected_range(s);
  } else if (a.framerate_cmd->parsed()) {
    report["calculator"] = "framerate";
    report["input"] = {{"r95", a.r95}, {"fps_ref", a.fps_ref}, {"fps", a.fps}};
    report["formula"] = "range = r95 * sqrt(fps_ref / fps)";
    report["range"] = framerate_range_scale(a.r95, a.fps_ref, a.fps);
  } else if (a.depth_cmd->parsed()) {
    report["calculator"] = "depth";
    report["input"] = {{"d", a.d}, {"fB", fB}};
    report["formula"] = "z = fB / d";
    StereoRig r = rig;
    r.intrinsics.fx = fB / r.baseline;  // honor --fb override
    const double z = disparity_to_depth(a.d, r);
    if (!std::isfinite(z))
      throw std::runtime_error("depth is undefined for non-positive disparity");
    report["z"] = z;
  } else {
    report["calculator"] = "limits";
    StereoRig r = rig;
    r.intrinsics.fx = fB / r.baseline;
    double z_min = 0.0, z_max = 0.0;
    operating_range(r, z_min, z_max);
    report["input"] = {{"fB", fB}};
    report["formula"] = "z_min = fB / (63 + 31/32); z_max = 32 * fB";
    report["z_min"] = z_min;
    report["z_max"] = z_max;
  }

  OutputStager stager;
  emit(report, a.report, stager);
}

// ---------------------------------------------------------------------------
// postproc
// ---------------------------------------------------------------------------

struct PostprocArgs {
  CommonOpts common;
  std::string in, out, report;
  CLI::App* sub = nullptr;
  CLI::Option *speckle_opt = nullptr, *speckle_tol_opt = nullptr,
              *median_opt = nullptr, *quantize_opt = nullptr;
  double speckle_tol = 1.0;
};

long parse_long(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string(what) + " expects an integer, got \"" +
                             s + "\"");
  }
}

double parse_double(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string(what) + " expects a number, got \"" +
                             s + "\"");
  }
}

void run_postproc(PostprocArgs& a) {
  Config cfg = a.common.resolve();
  DisparityMap d = read_disparity(a.in);
  const long long valid_in =
      (long long)std::count_if(d.values.begin(), d.values.end(),
                               [](uint16_t v) { return v != kInvalidDisparity; });

  // the chain is [(filter, parameter json)] applied in order
  std::vector<std::pair<std::string, json>> chain;
  const bool flags_given =
      a.speckle_opt->count() > 0 || a.median_opt->count() > 0 ||
      a.quantize_opt->count() > 0;
  if (flags_given) {
    // replay the command line: parse_order lists options as encountered
    size_t i_speckle = 0, i_median = 0, i_quant = 0;
    for (const CLI::Option* opt : a.sub->parse_order()) {
      if (opt == a.speckle_opt) {
        const long n = parse_long(a.speckle_opt->results()[i_speckle++], "--speckle");
        chain.emplace_back("speckle", json{{"max_region_size", n},
                                           {"similarity_tol", a.speckle_tol}});
      } else if (opt == a.median_opt) {
        const long k = parse_long(a.median_opt->results()[i_median++], "--median");
        chain.emplace_back("median", json{{"window", k}});
      } else if (opt == a.quantize_opt) {
        const double q =
            parse_double(a.quantize_opt->results()[i_quant++], "--quantize");
        chain.emplace_back("quantize", json{{"step", q}});
      }
    }
  } else if (cfg.loaded && cfg.j.contains("postproc") &&
             cfg.j["postproc"].contains("chain")) {
    for (const json& link : cfg.j["postproc"]["chain"]) {
      const std::string f = config_get<std::string>(link, "filter", "postproc.chain");
      if (f == "speckle") {
        json params;
        params["max_region_size"] =
            link.contains("max_region_size")
                ? config_get<int>(link, "max_region_size", "postproc.chain")
                : SpeckleParams{}.max_region_size;
        params["similarity_tol"] =
            link.contains("similarity_tol")
                ? config_get<double>(link, "similarity_tol", "postproc.chain")
                : SpeckleParams{}.similarity_tol;
        chain.emplace_back("speckle", params);
      } else if (f == "median") {
        chain.emplace_back(
            "median",
            json{{"window",
                  link.contains("window")
                      ? config_get<int>(link, "window", "postproc.chain")
                      : 3}});
      } else if (f == "quantize") {
        chain.emplace_back(
            "quantize",
            json{{"step",
                  link.contains("step")
                      ? config_get<double>(link, "step", "postproc.chain")
                      : 10.0 / 32.0}});
      } else {
        throw std::runtime_error("config: unknown postproc filter \"" + f + "\"");
      }
    }
  }

  json applied = json::array();
  for (const auto& [name, params] : chain) {
    if (name == "speckle") {
      SpeckleParams p;
      p.max_region_size = params["max_region_size"].get<int>();
      p.similarity_tol = params["similarity_tol"].get<double>();
      d = speckle_filter(d, p);
    } else if (name == "median") {
      d = median_filter(d, params["window"].get<int>());
    } else {
      d = quantize_disparity(d, params["step"].get<double>());
    }
    json entry;
    entry["filter"] = name;
    entry.update(params);
    applied.push_back(entry);
  }

  const long long valid_out =
      (long long)std::count_if(d.values.begin(), d.values.end(),
                               [](uint16_t v) { return v != kInvalidDisparity; });

  json report;
  report["subcommand"] = "postproc";
  report["width"] = d.width;
  report["height"] = d.height;
  report["chain"] = applied;
  report["valid_in"] = valid_in;
  report["valid_out"] = valid_out;

  OutputStager stager;
  if (!a.out.empty()) stager.add(a.out, encode_disparity(a.out, d));
  emit(report, a.report, stager);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"censtereo: software stereo depth pipeline"};
  app.require_subcommand(1);

  MatchArgs match_args;
  CLI::App* match_cmd =
      app.add_subcommand("match", "correlate a rectified stereo pair");
  match_args.common.attach(match_cmd);
  match_cmd->add_option("--left", match_args.left, "left image (PGM)")->required();
  match_cmd->add_option("--right", match_args.right, "right image (PGM)")->required();
  match_args.preset_opt =
      match_cmd->add_option("--preset", match_args.preset,
                            "confidence preset: off, low, medium, high");
  match_cmd->add_option("--out", match_args.out, "disparity output (.pfm/.pgm)");
  match_cmd->add_option("--raw-out", match_args.raw_out,
                        "pre-filter disparity output (.pfm/.pgm)");
  match_cmd->add_option("--report", match_args.report, "write the JSON report here too");

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "score a disparity map against ground truth");
  eval_args.common.attach(eval_cmd);
  eval_cmd->add_option("--pred", eval_args.pred, "prediction (.pfm/.pgm)")->required();
  eval_cmd->add_option("--gt", eval_args.gt, "ground truth (.pfm)")->required();
  eval_cmd->add_option("--mask", eval_args.mask,
                       "evaluation mask (PGM, nonzero = evaluate)");
  eval_cmd->add_option("--report", eval_args.report, "write the JSON report here too");

  SynthArgs synth_args;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "render a synthetic plane pair with ground truth");
  synth_args.common.attach(synth_cmd);
  synth_args.w_opt = synth_cmd->add_option("--width", synth_args.width, "image width");
  synth_args.h_opt = synth_cmd->add_option("--height", synth_args.height, "image height");
  synth_args.depth_opt =
      synth_cmd->add_option("--bit-depth", synth_args.bit_depth, "8, 10 or 16");
  synth_args.a_opt = synth_cmd->add_option(
      "--a", synth_args.a, "disparity ramp constant term, px (default 20)");
  synth_args.b_opt =
      synth_cmd->add_option("--b", synth_args.b, "disparity ramp x slope");
  synth_args.c_opt =
      synth_cmd->add_option("--c", synth_args.c, "disparity ramp y slope");
  synth_args.z_opt = synth_cmd->add_option(
      "--z", synth_args.z, "fronto-parallel plane depth in meters (uses the rig)");
  synth_args.z_opt->excludes(synth_args.a_opt);
  synth_args.z_opt->excludes(synth_args.b_opt);
  synth_args.z_opt->excludes(synth_args.c_opt);
  synth_args.dd_opt = synth_cmd->add_option("--dot-density", synth_args.dot_density,
                                            "dots per 100 px^2");
  synth_args.dr_opt = synth_cmd->add_option("--dot-radius", synth_args.dot_radius,
                                            "dot sigma, px");
  synth_args.ct_opt =
      synth_cmd->add_option("--contrast", synth_args.contrast, "dot amplitude, DN");
  synth_cmd->add_option("--out-left", synth_args.out_left, "left image output (PGM)");
  synth_cmd->add_option("--out-right", synth_args.out_right, "right image output (PGM)");
  synth_cmd->add_option("--out-gt", synth_args.out_gt, "ground-truth output (PFM)");
  synth_cmd->add_option("--report", synth_args.report, "write the JSON report here too");

  NoiseArgs noise_args;
  CLI::App* noise_cmd = app.add_subcommand("noise", "apply the sensor noise model");
  noise_args.common.attach(noise_cmd);
  noise_cmd->add_option("--in", noise_args.in, "input image (PGM)")->required();
  noise_cmd->add_option("--out", noise_args.out, "output image (PGM)");
  noise_args.bs_opt = noise_cmd->add_option("--blur-sigma", noise_args.blur_sigma,
                                            "MTF blur sigma, px (default 0.6)");
  noise_args.fw_opt = noise_cmd->add_option("--full-well", noise_args.full_well,
                                            "electrons at saturation (default 1500)");
  noise_args.rs_opt = noise_cmd->add_option("--read-sigma", noise_args.read_sigma,
                                            "read noise std, DN (default 2.0)");
  noise_args.b_on = noise_cmd->add_flag("--blur,!--no-blur", noise_args.blur_on,
                                        "toggle the blur stage");
  noise_args.p_on = noise_cmd->add_flag("--photon,!--no-photon", noise_args.photon_on,
                                        "toggle photon noise");
  noise_args.r_on = noise_cmd->add_flag("--read,!--no-read", noise_args.read_on,
                                        "toggle read noise");
  noise_cmd->add_option("--report", noise_args.report, "write the JSON report here too");

  PredictArgs predict_args;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "closed-form performance calculators");
  predict_cmd->require_subcommand(1);
  {
    PredictArgs& p = predict_args;
    p.bias_cmd = predict_cmd->add_subcommand(
        "bias", "parabola-refinement bias on a slanted plane");
    p.commons[0].attach(p.bias_cmd);
    p.bias_cmd->add_option("--d", p.d, "disparity, px (> sqrt(2))")->required();
    p.bias_cmd->add_option("--report", p.report, "write the JSON report here too");

    p.error_cmd = predict_cmd->add_subcommand("error", "depth RMS at a distance");
    p.commons[1].attach(p.error_cmd);
    p.error_cmd->add_option("--z", p.z, "distance, m")->required();
    p.error_cmd->add_option("--eps-d", p.eps_d, "disparity RMS, px (default 0.08)");
    p.fb_opts.push_back(p.error_cmd->add_option(
        "--fb", p.fb, "focal length * baseline, m*px (default: rig)"));
    p.error_cmd->add_option("--report", p.report, "write the JSON report here too");

    p.range_cmd = predict_cmd->add_subcommand(
        "range", "usable range from albedo and geometry");
    p.commons[2].attach(p.range_cmd);
    p.range_cmd->add_option("--r95", p.r95, "white-wall 95% range, m")->required();
    p.range_cmd->add_option("--albedo", p.albedo, "target reflectance (0,1]");
    p.range_cmd->add_option("--theta-target", p.theta_target, "target tilt, deg");
    p.range_cmd->add_option("--theta-fov", p.theta_fov, "off-axis angle, deg");
    p.range_cmd->add_option("--report", p.report, "write the JSON report here too");

    p.framerate_cmd = predict_cmd->add_subcommand(
        "framerate", "range scaling with frame rate");
    p.commons[3].attach(p.framerate_cmd);
    p.framerate_cmd->add_option("--r95", p.r95, "range at the reference rate, m")
        ->required();
    p.framerate_cmd->add_option("--fps-ref", p.fps_ref, "reference rate, Hz")
        ->required();
    p.framerate_cmd->add_option("--fps", p.fps, "target rate, Hz")->required();
    p.framerate_cmd->add_option("--report", p.report,
                                "write the JSON report here too");

    p.depth_cmd = predict_cmd->add_subcommand("depth", "depth for a disparity");
    p.commons[4].attach(p.depth_cmd);
    p.depth_cmd->add_option("--d", p.d, "disparity, px")->required();
    p.fb_opts.push_back(p.depth_cmd->add_option(
        "--fb", p.fb, "focal length * baseline, m*px (default: rig)"));
    p.depth_cmd->add_option("--report", p.report, "write the JSON report here too");

    p.limits_cmd = predict_cmd->add_subcommand(
        "limits", "operating range of the rig's disparity search");
    p.commons[5].attach(p.limits_cmd);
    p.fb_opts.push_back(p.limits_cmd->add_option(
        "--fb", p.fb, "focal length * baseline, m*px (default: rig)"));
    p.limits_cmd->add_option("--report", p.report, "write the JSON report here too");
  }

  PostprocArgs post_args;
  CLI::App* post_cmd =
      app.add_subcommand("postproc", "filter a disparity map (applied in flag order)");
  post_args.sub = post_cmd;
  post_args.common.attach(post_cmd);
  post_cmd->add_option("--in", post_args.in, "input disparity (.pfm/.pgm)")->required();
  post_cmd->add_option("--out", post_args.out, "output disparity (.pfm/.pgm)");
  post_args.speckle_opt =
      post_cmd->add_option("--speckle", "remove components smaller than N pixels")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  post_args.speckle_tol_opt = post_cmd->add_option(
      "--speckle-tol", post_args.speckle_tol,
      "speckle adjacency tolerance, px (default 1.0)");
  post_args.median_opt =
      post_cmd->add_option("--median", "median filter with an odd KxK window")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  post_args.quantize_opt =
      post_cmd->add_option("--quantize", "snap to a step of N/32 px within (0,1]")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  post_cmd->add_option("--report", post_args.report, "write the JSON report here too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (match_cmd->parsed()) run_match(match_args);
    else if (eval_cmd->parsed()) run_eval(eval_args);
    else if (synth_cmd->parsed()) run_synth(synth_args);
    else if (noise_cmd->parsed()) run_noise(noise_args);
    else if (predict_cmd->parsed()) run_predict(predict_args);
    else if (post_cmd->parsed()) run_postproc(post_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
