#include "bqnn/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bqnn/dynamics.hpp"
#include "bqnn/errors.hpp"
#include "bqnn/fock_oracle.hpp"
#include "bqnn/gbs.hpp"

extern char** environ;

namespace bqnn {

namespace {

using nlohmann::json;

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt * 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

std::string join_key(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](std::string_view k) { return item.key() == k; });
    if (!known) fail("unknown config key: " + join_key(path, item.key()));
  }
}

const json& require_object(const json& parent, const std::string& path, const char* key) {
  if (!parent.contains(key)) fail("missing config section: " + join_key(path, key));
  const json& v = parent.at(key);
  if (!v.is_object()) fail(join_key(path, key) + " must be an object");
  return v;
}

double get_number(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail("missing config key: " + join_key(path, key));
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join_key(path, key) + " must be a number");
  return v.get<double>();
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? get_number(obj, path, key) : fallback;
}

std::int64_t get_integer(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail("missing config key: " + join_key(path, key));
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(join_key(path, key) + " must be an integer");
  return v.get<std::int64_t>();
}

std::int64_t get_integer(const json& obj, const std::string& path, const char* key,
                         std::int64_t fallback) {
  return obj.contains(key) ? get_integer(obj, path, key) : fallback;
}

int get_int(const json& obj, const std::string& path, const char* key) {
  return static_cast<int>(get_integer(obj, path, key));
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  return static_cast<int>(get_integer(obj, path, key, fallback));
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(join_key(path, key) + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail("missing config key: " + join_key(path, key));
  const json& v = obj.at(key);
  if (!v.is_string()) fail(join_key(path, key) + " must be a string");
  return v.get<std::string>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
  return obj.contains(key) ? get_string(obj, path, key) : fallback;
}

EncodingTarget parse_target(const std::string& s) {
  if (s == "eps") return EncodingTarget::eps;
  if (s == "g") return EncodingTarget::g;
  if (s == "gs") return EncodingTarget::gs;
  fail("encoding.target must be one of eps, g, gs (got \"" + s + "\")");
}

EncodingKind parse_kind(const std::string& s) {
  if (s == "amplitude") return EncodingKind::amplitude;
  if (s == "phase") return EncodingKind::phase;
  fail("encoding.kind must be amplitude or phase (got \"" + s + "\")");
}

LossKind parse_loss(const std::string& s) {
  if (s == "mse") return LossKind::mse;
  if (s == "bce") return LossKind::bce_logits;
  if (s == "ce") return LossKind::cross_entropy;
  fail("loss must be one of mse, bce, ce (got \"" + s + "\")");
}

ExperimentConfig::Group parse_group(const json& sys, const std::string& path, const char* key,
                                    bool trainable) {
  if (!sys.contains(key)) fail("missing config key: " + join_key(path, key));
  const json& obj = sys.at(key);
  const std::string p = join_key(path, key);
  if (!obj.is_object()) fail(p + " must be an object with init / jitter / lr");
  if (trainable)
    check_keys(obj, p, {"init", "jitter", "lr"});
  else
    check_keys(obj, p, {"init", "jitter"});
  ExperimentConfig::Group g;
  g.init = get_number(obj, p, "init");
  g.jitter = get_number(obj, p, "jitter", 0.0);
  if (g.jitter < 0.0) fail(p + ".jitter must be nonnegative");
  g.lr = trainable ? get_number(obj, p, "lr", 0.0) : 0.0;
  if (g.lr < 0.0) fail(p + ".lr must be nonnegative");
  return g;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(what + ": invalid JSON");
  return j;
}

// BQNN_TRAINING__EPOCHS=10 -> j["training"]["epochs"] = 10.  Values are parsed
// as JSON when possible, otherwise taken as strings.
void apply_env_overrides(json& j) {
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind("BQNN_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(5, eq - 5);
    const std::string value = entry.substr(eq + 1);

    std::vector<std::string> segments;
    std::size_t pos = 0;
    while (pos <= name.size()) {
      const auto sep = name.find("__", pos);
      std::string seg = name.substr(pos, sep == std::string::npos ? sep : sep - pos);
      std::transform(seg.begin(), seg.end(), seg.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      segments.push_back(std::move(seg));
      if (sep == std::string::npos) break;
      pos = sep + 2;
    }
    if (segments.empty() ||
        std::any_of(segments.begin(), segments.end(), [](const std::string& s) { return s.empty(); }))
      fail("malformed environment override: BQNN_" + name);

    try {
      json* node = &j;
      for (std::size_t i = 0; i + 1 < segments.size(); ++i) node = &((*node)[segments[i]]);
      json parsed = json::parse(value, nullptr, false);
      (*node)[segments.back()] = parsed.is_discarded() ? json(value) : std::move(parsed);
    } catch (const json::exception&) {
      fail("environment override BQNN_" + name + " conflicts with a scalar config value");
    }
  }
}

ExperimentConfig parse_config_json(json j, std::optional<std::uint64_t> seed_override,
                                   bool with_env) {
  if (!j.is_object()) fail("config root must be an object");
  if (with_env) apply_env_overrides(j);
  if (seed_override) j["seed"] = *seed_override;

  check_keys(j, "", {"task", "seed", "modes", "uploads", "segment_s", "system", "encoding",
                     "measurement", "readout", "loss", "training", "clamp", "dataset"});

  ExperimentConfig cfg;
  cfg.task = get_string(j, "", "task");
  if (cfg.task != "sinesquare" && cfg.task != "spirals" && cfg.task != "digits")
    fail("task must be one of sinesquare, spirals, digits (got \"" + cfg.task + "\")");

  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (s.is_number_unsigned())
      cfg.seed = s.get<std::uint64_t>();
    else if (s.is_number_integer() && s.get<std::int64_t>() >= 0)
      cfg.seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
    else
      fail("seed must be a nonnegative integer");
  }

  cfg.modes = get_int(j, "", "modes");
  if (cfg.modes < 1) fail("modes must be positive");
  cfg.uploads = get_int(j, "", "uploads", 1);
  if (cfg.uploads < 1) fail("uploads must be positive");
  cfg.segment_s = get_number(j, "", "segment_s");
  if (!(cfg.segment_s > 0.0)) fail("segment_s must be positive");

  const json& sys = require_object(j, "", "system");
  check_keys(sys, "system", {"kappa_hz", "delta_hz", "eps_sqrt_hz", "g_hz", "gs_hz"});
  cfg.kappa = parse_group(sys, "system", "kappa_hz", /*trainable=*/false);
  if (!(cfg.kappa.init - cfg.kappa.jitter > 0.0))
    fail("system.kappa_hz: loss rate draws must stay positive");
  cfg.delta = parse_group(sys, "system", "delta_hz", true);
  cfg.eps = parse_group(sys, "system", "eps_sqrt_hz", true);
  cfg.g = parse_group(sys, "system", "g_hz", true);
  cfg.gs = parse_group(sys, "system", "gs_hz", true);

  if (j.contains("encoding")) {
    const json& e = require_object(j, "", "encoding");
    check_keys(e, "encoding", {"target", "kind", "train_theta0", "theta0", "theta0_jitter"});
    ExperimentConfig::Enc enc;
    enc.target = parse_target(get_string(e, "encoding", "target"));
    enc.kind = parse_kind(get_string(e, "encoding", "kind", "amplitude"));
    enc.train_theta0 = get_bool(e, "encoding", "train_theta0", true);
    if (e.contains("theta0")) enc.theta0_init = get_number(e, "encoding", "theta0");
    enc.theta0_jitter = get_number(e, "encoding", "theta0_jitter", 0.0);
    if (enc.theta0_jitter < 0.0) fail("encoding.theta0_jitter must be nonnegative");
    cfg.encoding = enc;
  }

  const json& meas = require_object(j, "", "measurement");
  check_keys(meas, "measurement", {"probes", "modes", "max_photons"});
  if (meas.contains("probes")) {
    if (meas.contains("modes") || meas.contains("max_photons"))
      fail("measurement: give either probes or modes/max_photons, not both");
    const json& arr = meas.at("probes");
    if (!arr.is_array() || arr.empty()) fail("measurement.probes must be a nonempty array");
    for (const json& p : arr) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
        fail("measurement.probes entries must be [mode, photons] integer pairs");
      const int mode = p[0].get<int>();
      const int photons = p[1].get<int>();
      if (mode < 0 || mode >= cfg.modes) fail("measurement.probes: mode out of range");
      if (photons < 0) fail("measurement.probes: photon count must be nonnegative");
      cfg.plan.probes.push_back({mode, photons});
    }
  } else {
    const int mm = get_int(meas, "measurement", "modes");
    const int mp = get_int(meas, "measurement", "max_photons");
    if (mm < 1 || mm > cfg.modes) fail("measurement.modes out of range");
    if (mp < 0) fail("measurement.max_photons must be nonnegative");
    cfg.plan = MeasurementPlan::canonical(mm, mp);
  }

  const json& ro = require_object(j, "", "readout");
  check_keys(ro, "readout", {"outputs", "w_init", "b_init", "lr_w", "lr_b"});
  cfg.outputs = get_int(ro, "readout", "outputs", 1);
  if (cfg.outputs < 1) fail("readout.outputs must be positive");
  cfg.w_init = get_number(ro, "readout", "w_init", 1.0);
  cfg.b_init = get_number(ro, "readout", "b_init", 0.0);
  cfg.lr_w = get_number(ro, "readout", "lr_w", 0.01);
  cfg.lr_b = get_number(ro, "readout", "lr_b", 0.01);

  cfg.loss = parse_loss(get_string(j, "", "loss"));
  if (cfg.loss == LossKind::cross_entropy && cfg.outputs < 2)
    fail("cross entropy needs at least two outputs");
  if (cfg.loss == LossKind::bce_logits && cfg.outputs != 1)
    fail("bce uses a single logit output");

  const json& tr = require_object(j, "", "training");
  check_keys(tr, "training",
             {"epochs", "batches", "beta", "n_target", "early_stop", "shots", "seq_steps",
              "detach_every", "eval_steps", "reg_samples", "train_size", "test_size"});
  cfg.epochs = get_int(tr, "training", "epochs", 500);
  if (cfg.epochs < 1) fail("training.epochs must be positive");
  cfg.batches = get_int(tr, "training", "batches", 5);
  if (cfg.batches < 1) fail("training.batches must be positive");
  cfg.beta = get_number(tr, "training", "beta", 0.0);
  if (cfg.beta < 0.0) fail("training.beta must be nonnegative");
  cfg.n_target = get_number(tr, "training", "n_target", 2.0);
  cfg.early_stop = get_bool(tr, "training", "early_stop", false);
  cfg.shots = get_integer(tr, "training", "shots", 1000);
  if (cfg.shots < 1) fail("training.shots must be positive");
  cfg.seq_steps = get_int(tr, "training", "seq_steps", 40);
  cfg.detach_every = get_int(tr, "training", "detach_every", 8);
  cfg.eval_steps = get_int(tr, "training", "eval_steps", 80);
  if (cfg.seq_steps < 8 || cfg.seq_steps % 8 != 0)
    fail("training.seq_steps must be a positive multiple of 8");
  if (cfg.detach_every < 1) fail("training.detach_every must be positive");
  if (cfg.eval_steps < 8 || cfg.eval_steps % 8 != 0)
    fail("training.eval_steps must be a positive multiple of 8");
  cfg.reg_samples = get_int(tr, "training", "reg_samples", 5);
  if (cfg.reg_samples < 2) fail("training.reg_samples must be at least 2");
  cfg.train_size = get_int(tr, "training", "train_size", 0);
  cfg.test_size = get_int(tr, "training", "test_size", 0);

  if (j.contains("clamp")) {
    const json& cl = require_object(j, "", "clamp");
    check_keys(cl, "clamp", {"g_max_hz", "gs_max_hz"});
    cfg.g_max_hz = get_number(cl, "clamp", "g_max_hz", cfg.g_max_hz);
    if (!(cfg.g_max_hz > 0.0)) fail("clamp.g_max_hz must be positive");
    if (cl.contains("gs_max_hz")) {
      cfg.gs_max_hz = get_number(cl, "clamp", "gs_max_hz");
      if (!(*cfg.gs_max_hz > 0.0)) fail("clamp.gs_max_hz must be positive");
    }
  }
  if (cfg.encoding &&
      (cfg.encoding->target == EncodingTarget::g || cfg.encoding->target == EncodingTarget::gs) &&
      !cfg.gs_max_hz)
    fail("clamp.gs_max_hz is required when a coupling class is encoded");

  if (j.contains("dataset")) {
    const json& ds = require_object(j, "", "dataset");
    check_keys(ds, "dataset", {"path"});
    cfg.dataset_path = get_string(ds, "dataset", "path", "");
  }

  if (cfg.task == "spirals") {
    if (cfg.train_size < 2 || cfg.train_size % 2 != 0 || cfg.test_size < 2 ||
        cfg.test_size % 2 != 0)
      fail("spirals: train_size and test_size must be positive even counts (mirrored pairs)");
  } else if (cfg.task == "digits") {
    if (cfg.dataset_path.empty()) fail("digits: dataset.path is required");
    if (cfg.train_size < 1 || cfg.test_size < 1)
      fail("digits: train_size and test_size must be positive");
  }

  cfg.canonical_json = j.dump();
  cfg.hash = fnv1a_hex(cfg.canonical_json);
  return cfg;
}

json complex_array(const VecC& v, double scale) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i)
    a.push_back(json::array({v[i].real() * scale, v[i].imag() * scale}));
  return a;
}

json real_array(const VecR& v, double scale) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i] * scale);
  return a;
}

VecC parse_complex_array(const json& a, double scale, int expect, const std::string& what) {
  if (!a.is_array() || static_cast<int>(a.size()) != expect)
    fail("checkpoint: " + what + " must be an array of " + std::to_string(expect) + " entries");
  VecC v(expect);
  for (int i = 0; i < expect; ++i) {
    const json& e = a[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      fail("checkpoint: " + what + " entries must be [re, im] pairs");
    v[i] = cd(e[0].get<double>() * scale, e[1].get<double>() * scale);
  }
  return v;
}

VecR parse_real_array(const json& a, double scale, int expect, const std::string& what) {
  if (!a.is_array() || static_cast<int>(a.size()) != expect)
    fail("checkpoint: " + what + " must be an array of " + std::to_string(expect) + " entries");
  VecR v(expect);
  for (int i = 0; i < expect; ++i) {
    if (!a[i].is_number()) fail("checkpoint: " + what + " entries must be numbers");
    v[i] = a[i].get<double>() * scale;
  }
  return v;
}

double theta_scale_si(EncodingTarget t) {
  return t == EncodingTarget::eps ? std::sqrt(kRenormScale) : kRenormScale;
}

void restore_params(const json& params, Model& model) {
  if (!params.is_object()) fail("checkpoint: params must be an object");
  const int m = model.modes();
  const int pairs = SystemParams::pair_count(m);
  model.kappa = parse_real_array(params.at("kappa_hz"), 1.0 / kRenormScale, m, "kappa_hz");

  const json& ups = params.at("uploads");
  if (!ups.is_array() || static_cast<int>(ups.size()) != model.uploads())
    fail("checkpoint: uploads count mismatch");
  const double amp = 1.0 / std::sqrt(kRenormScale);
  const double rate = 1.0 / kRenormScale;
  for (int r = 0; r < model.uploads(); ++r) {
    const json& up = ups[r];
    UploadParams& dst = model.upload[r];
    dst.delta = parse_real_array(up.at("delta_hz"), rate, m, "delta_hz");
    if (!model.encodes(EncodingTarget::eps))
      dst.eps = parse_complex_array(up.at("eps_sqrt_hz"), amp, m, "eps_sqrt_hz");
    if (!model.encodes(EncodingTarget::g))
      dst.g = parse_real_array(up.at("g_hz"), rate, pairs, "g_hz");
    if (!model.encodes(EncodingTarget::gs))
      dst.gs = parse_complex_array(up.at("gs_hz"), rate, pairs, "gs_hz");
    if (model.encoding()) {
      const EncodingSpec& spec = *model.encoding();
      const json& enc = up.at("encoding");
      const double ts = 1.0 / theta_scale_si(spec.target);
      dst.enc.theta0 = parse_complex_array(enc.at("theta0"), ts, spec.dim, "encoding.theta0");
      if (spec.has_bias())
        dst.enc.theta_bias =
            parse_complex_array(enc.at("theta_bias"), ts, spec.dim, "encoding.theta_bias");
      if (spec.kind == EncodingKind::phase) {
        dst.enc.phi0 = parse_real_array(enc.at("phi0"), 1.0, spec.dim, "encoding.phi0");
        dst.enc.phi_bias =
            parse_real_array(enc.at("phi_bias"), 1.0, spec.dim, "encoding.phi_bias");
      }
    }
  }

  const json& w = params.at("readout_w");
  if (!w.is_array() || static_cast<int>(w.size()) != model.readout_w.rows())
    fail("checkpoint: readout_w row count mismatch");
  for (int o = 0; o < model.readout_w.rows(); ++o) {
    const VecR row = parse_real_array(w[o], 1.0, static_cast<int>(model.readout_w.cols()),
                                      "readout_w row");
    model.readout_w.row(o) = row.transpose();
  }
  model.readout_b =
      parse_real_array(params.at("readout_b"), 1.0, static_cast<int>(model.readout_b.size()),
                       "readout_b");
}

void write_metrics(const ExperimentConfig& cfg, const TrainResult& res,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path);
  const json header{{"schema_version", 1},
                    {"config_hash", cfg.hash},
                    {"task", cfg.task},
                    {"seed", cfg.seed}};
  out << header.dump() << "\n";
  for (const EpochRecord& r : res.history) {
    json row{{"epoch", r.epoch},
             {"loss", r.loss},
             {"task_loss", r.task_loss},
             {"reg_loss", r.reg_loss},
             {"train_acc", r.train_acc},
             {"test_acc", r.test_acc},
             {"clamp_events", r.clamp_events},
             {"grad_norm", r.grad_norm}};
    if (r.shot_acc >= 0.0) row["shot_acc"] = r.shot_acc;
    out << row.dump() << "\n";
  }
}

void write_timings(const ExperimentConfig& cfg, const TrainResult& res,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path);
  out << json{{"schema_version", 1}, {"config_hash", cfg.hash}}.dump() << "\n";
  double total = 0.0;
  for (const EpochRecord& r : res.history) {
    total += r.wall_ms;
    out << json{{"epoch", r.epoch}, {"wall_ms", r.wall_ms}}.dump() << "\n";
  }
  out << json{{"total_wall_ms", total}}.dump() << "\n";
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

ExperimentConfig load_experiment_config(const std::string& path,
                                        std::optional<std::uint64_t> seed_override) {
  return parse_config_json(parse_json_text(read_text_file(path), path), seed_override,
                           /*with_env=*/true);
}

ExperimentConfig parse_experiment_config_text(const std::string& json_text,
                                              std::optional<std::uint64_t> seed_override) {
  return parse_config_json(parse_json_text(json_text, "config"), seed_override,
                           /*with_env=*/false);
}

ExperimentSetup build_experiment(const ExperimentConfig& cfg) {
  const int m = cfg.modes;
  const int pairs = SystemParams::pair_count(m);

  ModelSpec mspec;
  mspec.modes = m;
  mspec.uploads = cfg.uploads;
  mspec.features = cfg.plan.size();
  mspec.outputs = cfg.outputs;
  if (cfg.encoding) {
    EncodingSpec e;
    e.target = cfg.encoding->target;
    e.kind = cfg.encoding->kind;
    e.train_theta0 = cfg.encoding->train_theta0;
    mspec.encoding = e;
  }

  LearningRates lr;
  lr.delta = cfg.delta.lr;
  lr.eps = cfg.eps.lr;
  lr.g = cfg.g.lr;
  lr.gs = cfg.gs.lr;
  lr.readout_w = cfg.lr_w;
  lr.readout_b = cfg.lr_b;

  Model model(mspec, lr);

  // One init stream; draw order is fixed so the same seed gives the same
  // physics regardless of which class the encoding replaces.
  std::mt19937_64 rng(mix(cfg.seed, 0x1417u));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto draw = [&](const ExperimentConfig::Group& grp) {
    return grp.init + grp.jitter * unit(rng);
  };

  model.kappa = VecR(m);
  for (int k = 0; k < m; ++k) {
    const double hz = draw(cfg.kappa);
    if (!(hz > 0.0)) fail("drawn kappa is not positive");
    model.kappa[k] = rate_to_internal(hz);
  }

  for (int r = 0; r < cfg.uploads; ++r) {
    UploadParams& up = model.upload[r];
    for (int k = 0; k < m; ++k) up.delta[k] = rate_to_internal(draw(cfg.delta));
    for (int k = 0; k < m; ++k) up.eps[k] = cd(amplitude_to_internal(draw(cfg.eps)), 0.0);
    for (int q = 0; q < pairs; ++q) up.g[q] = rate_to_internal(draw(cfg.g));
    for (int q = 0; q < pairs; ++q) up.gs[q] = cd(rate_to_internal(draw(cfg.gs)), 0.0);

    if (model.encoding()) {
      const EncodingSpec& espec = *model.encoding();
      const ExperimentConfig::Group& cls = espec.target == EncodingTarget::eps ? cfg.eps
                                           : espec.target == EncodingTarget::g ? cfg.g
                                                                               : cfg.gs;
      for (int i = 0; i < espec.dim; ++i) {
        const double si = cfg.encoding->theta0_init
                              ? *cfg.encoding->theta0_init + cfg.encoding->theta0_jitter * unit(rng)
                              : draw(cls);
        const double internal = espec.target == EncodingTarget::eps ? amplitude_to_internal(si)
                                                                    : rate_to_internal(si);
        up.enc.theta0[i] = cd(internal, 0.0);
      }
      if (espec.kind == EncodingKind::phase) up.enc.phi0.setConstant(kPi);
    }
  }

  model.readout_w.setConstant(cfg.w_init);
  model.readout_b.setConstant(cfg.b_init);

  Dataset train, test;
  int input_dim = 1;
  if (cfg.task == "spirals") {
    train = make_spirals(cfg.train_size / 2, mix(cfg.seed, 0xD47Au));
    test = make_spirals(cfg.test_size / 2, mix(cfg.seed, 0xD47Bu));
    input_dim = train.input_dim;
  } else if (cfg.task == "digits") {
    const Dataset all = load_digits_csv(cfg.dataset_path);
    if (cfg.train_size + cfg.test_size > all.size())
      fail("digits: train_size + test_size exceeds the dataset (" + std::to_string(all.size()) +
           " rows)");
    std::tie(train, test) = split_dataset(all, cfg.train_size, cfg.test_size, mix(cfg.seed, 0x5711u));
    input_dim = all.input_dim;
  }

  ForwardOptions fwd;
  fwd.dt = time_to_internal(cfg.segment_s);
  fwd.plan = cfg.plan;
  fwd.loss = cfg.loss;
  fwd.input_dim = input_dim;
  if (cfg.uploads > 1) {
    if (input_dim % cfg.uploads != 0)
      fail("uploads must divide the input dimension (" + std::to_string(input_dim) + " features, " +
           std::to_string(cfg.uploads) + " uploads)");
    fwd.slice_len = input_dim / cfg.uploads;
  }
  fwd.reg_samples = cfg.reg_samples;

  TrainOptions topt;
  topt.epochs = cfg.epochs;
  topt.batches = cfg.batches;
  topt.beta = cfg.beta;
  topt.n_target = cfg.n_target;
  topt.clamp.g_max = rate_to_internal(cfg.g_max_hz);
  if (cfg.gs_max_hz) topt.clamp.gs_max = rate_to_internal(*cfg.gs_max_hz);
  topt.seed = cfg.seed;
  topt.seq_steps = cfg.seq_steps;
  topt.detach_every = cfg.detach_every;
  topt.eval_steps = cfg.eval_steps;
  topt.early_stop = cfg.early_stop;
  topt.shots = cfg.shots;

  return ExperimentSetup{cfg, std::move(model), std::move(fwd), topt, std::move(train),
                         std::move(test)};
}

TrainResult run_training(ExperimentSetup& setup, Trainer& trainer, const std::string& out_dir) {
  TrainResult res = setup.cfg.task == "sinesquare"
                        ? trainer.train_sequential()
                        : trainer.train_supervised(setup.train, setup.test);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_metrics(setup.cfg, res, out_dir + "/metrics.jsonl");
    write_timings(setup.cfg, res, out_dir + "/timings.jsonl");
    save_checkpoint(setup, trainer.optimizer(), out_dir + "/checkpoint.json");
  }
  return res;
}

void save_checkpoint(const ExperimentSetup& setup, const Adam& adam, const std::string& path) {
  const Model& model = setup.model;
  json ck;
  ck["schema_version"] = 1;
  ck["config"] = parse_json_text(setup.cfg.canonical_json, "config");
  ck["config_hash"] = setup.cfg.hash;

  json params;
  params["kappa_hz"] = real_array(model.kappa, kRenormScale);
  json uploads = json::array();
  const double amp = std::sqrt(kRenormScale);
  for (int r = 0; r < model.uploads(); ++r) {
    const UploadParams& up = model.upload[r];
    json u;
    u["delta_hz"] = real_array(up.delta, kRenormScale);
    if (!model.encodes(EncodingTarget::eps)) u["eps_sqrt_hz"] = complex_array(up.eps, amp);
    if (!model.encodes(EncodingTarget::g)) u["g_hz"] = real_array(up.g, kRenormScale);
    if (!model.encodes(EncodingTarget::gs)) u["gs_hz"] = complex_array(up.gs, kRenormScale);
    if (model.encoding()) {
      const EncodingSpec& espec = *model.encoding();
      const double ts = theta_scale_si(espec.target);
      json enc;
      enc["theta0"] = complex_array(up.enc.theta0, ts);
      if (espec.has_bias()) enc["theta_bias"] = complex_array(up.enc.theta_bias, ts);
      if (espec.kind == EncodingKind::phase) {
        enc["phi0"] = real_array(up.enc.phi0, 1.0);
        enc["phi_bias"] = real_array(up.enc.phi_bias, 1.0);
      }
      u["encoding"] = enc;
    }
    uploads.push_back(std::move(u));
  }
  params["uploads"] = std::move(uploads);
  json w = json::array();
  for (int o = 0; o < model.readout_w.rows(); ++o)
    w.push_back(real_array(model.readout_w.row(o).transpose(), 1.0));
  params["readout_w"] = std::move(w);
  params["readout_b"] = real_array(model.readout_b, 1.0);
  ck["params"] = std::move(params);

  // Internal-unit optimizer state; only meaningful together with params.
  json ad;
  ad["step"] = adam.step_count();
  ad["m"] = real_array(adam.first_moment(), 1.0);
  ad["v"] = real_array(adam.second_moment(), 1.0);
  ck["adam"] = std::move(ad);

  std::ofstream out(path);
  if (!out) fail("cannot write " + path);
  out << ck.dump(2) << "\n";
}

EvalReport evaluate_checkpoint(const std::string& checkpoint_path,
                               const std::optional<std::string>& config_path,
                               std::optional<std::int64_t> shots) {
  const json ck = parse_json_text(read_text_file(checkpoint_path), checkpoint_path);
  if (!ck.is_object() || ck.value("schema_version", 0) != 1)
    fail(checkpoint_path + ": unsupported checkpoint schema");
  if (!ck.contains("config") || !ck.contains("config_hash") || !ck.contains("params"))
    fail(checkpoint_path + ": incomplete checkpoint");

  ExperimentConfig cfg = parse_experiment_config_text(ck.at("config").dump());
  if (cfg.hash != ck.at("config_hash").get<std::string>())
    fail(checkpoint_path + ": embedded config does not match its stored hash");
  if (config_path) {
    const ExperimentConfig given = parse_experiment_config_text(read_text_file(*config_path));
    if (given.hash != cfg.hash)
      fail(*config_path + ": config hash " + given.hash + " does not match checkpoint " + cfg.hash);
  }

  ExperimentSetup setup = build_experiment(cfg);
  restore_params(ck.at("params"), setup.model);

  Trainer trainer(setup.model, setup.forward, setup.training);
  EvalReport report;
  report.task = cfg.task;
  if (cfg.task == "sinesquare") {
    const std::vector<WaveStep> stream = make_eval_stream(setup.training);
    report.accuracy = trainer.sequential_accuracy(stream);
    report.shot_accuracy =
        trainer.sequential_shot_accuracy(stream, shots.value_or(cfg.shots), mix(cfg.seed, 0xEA11u));
    report.samples = static_cast<int>(stream.size());
  } else {
    report.accuracy = trainer.accuracy(setup.test);
    report.samples = setup.test.size();
  }
  return report;
}

GradientReport run_gradient_check(const ExperimentConfig& cfg, int samples, double h) {
  if (samples < 1) throw std::invalid_argument("run_gradient_check: samples must be positive");
  ExperimentSetup setup = build_experiment(cfg);
  const VecR at = setup.model.flatten();
  const std::vector<std::string> names = setup.model.param_names();
  const int dyn = setup.model.dyn_count();

  if (cfg.task == "sinesquare") {
    const int steps = 8 * ((samples + 7) / 8);
    std::mt19937_64 rng(mix(cfg.seed, 0x6D0Cu));
    const std::vector<WaveStep> chunk = make_wave_chunk(steps, rng);

    // Full tangent carry (no detach), so the analytic value is exact for the
    // replayed chunk loss.
    VecR grad = VecR::Zero(at.size());
    TangentState ts = TangentState::vacuum(setup.model.modes(), dyn);
    for (const WaveStep& w : chunk) {
      const VecR target = VecR::Constant(1, w.label);
      forward_step(setup.model, setup.forward, ts, w.value, target, &grad);
    }
    grad /= steps;
    if (cfg.beta > 0.0) {
      const RealWithGrad reg =
          photon_regularizer(setup.model, setup.forward, cfg.beta, cfg.n_target);
      grad.head(dyn) += reg.grad;
    }

    const auto loss_fn = [&](const VecR& flat) {
      Model candidate = setup.model;
      candidate.unflatten(flat);
      GaussianState state = GaussianState::vacuum(candidate.modes());
      double total = 0.0;
      for (const WaveStep& w : chunk) {
        const VecR target = VecR::Constant(1, w.label);
        total += forward_step_value(candidate, setup.forward, state, w.value, target).loss.value;
      }
      total /= steps;
      if (cfg.beta > 0.0)
        total += photon_regularizer(candidate, setup.forward, cfg.beta, cfg.n_target).value;
      return total;
    };
    return finite_difference_check(loss_fn, at, grad, names, h);
  }

  const int n = std::min<int>(samples, setup.train.size());
  if (n < 1) fail("gradient check: the training split is empty");

  VecR grad = VecR::Zero(at.size());
  for (int i = 0; i < n; ++i) {
    const Sample& s = setup.train.samples[i];
    const SampleForward f = forward_sample(setup.model, setup.forward, s.x, s.target);
    accumulate_sample_gradient(setup.model, f, grad);
  }
  grad /= n;
  if (cfg.beta > 0.0) {
    const RealWithGrad reg = photon_regularizer(setup.model, setup.forward, cfg.beta, cfg.n_target);
    grad.head(dyn) += reg.grad;
  }

  const auto loss_fn = [&](const VecR& flat) {
    Model candidate = setup.model;
    candidate.unflatten(flat);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const Sample& s = setup.train.samples[i];
      const VecR features = forward_features(candidate, setup.forward, s.x);
      total += evaluate_loss(setup.forward.loss, candidate.logits(features), s.target).value;
    }
    total /= n;
    if (cfg.beta > 0.0)
      total += photon_regularizer(candidate, setup.forward, cfg.beta, cfg.n_target).value;
    return total;
  };
  return finite_difference_check(loss_fn, at, grad, names, h);
}

OracleComparison run_oracle_compare(int config_count, std::uint64_t seed) {
  if (config_count < 1)
    throw std::invalid_argument("run_oracle_compare: config_count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto u = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  OracleComparison out;
  int attempts = 0;
  const double dt = 1.0;
  while (static_cast<int>(out.rows.size()) < config_count) {
    if (++attempts > 400 * config_count)
      throw NumericalResidue("oracle comparison: rejected too many drawn systems");
    const int m = 1 + static_cast<int>(out.rows.size() % 2);
    SystemParams p = SystemParams::zero(m);
    for (int k = 0; k < m; ++k) {
      p.kappa[k] = u(0.2, 2.0);
      p.delta[k] = u(-1.5, 1.5);
      p.eps[k] = std::polar(u(0.0, 1.0), u(0.0, 2.0 * kPi));
    }
    for (int q = 0; q < SystemParams::pair_count(m); ++q) {
      p.g[q] = u(0.0, 2.0);
      p.gs[q] = std::polar(u(0.0, 0.8), u(0.0, 2.0 * kPi));
    }

    // Cheap Gaussian precheck: keep only comfortably stable, few-photon draws
    // so a 14-level truncation is beyond reproach.
    DriftSpectrum spec;
    try {
      spec = decompose_drift(p, DegeneracyGuard::value_only);
    } catch (const std::exception&) {
      continue;
    }
    if (max_re_lambda(spec) > -0.05) continue;
    bool hot = false;
    GaussianState at_dt = GaussianState::vacuum(m);
    for (int i = 1; i <= 10 && !hot; ++i) {
      const GaussianState st =
          evolve_segment(GaussianState::vacuum(m), make_propagator(spec, dt * i / 10.0));
      for (int k = 0; k < m; ++k) hot = hot || mean_photon_number(st, k) > 3.0;
      if (i == 10) at_dt = st;
    }
    if (hot) continue;

    try {
      FockOracleOptions opts;
      opts.n_max = 14;
      const FockOracle oracle(p, opts);
      const MatC rho = oracle.evolve(oracle.vacuum(), dt);
      double worst = 0.0;
      for (int k = 0; k < m; ++k) {
        const VecR marginal = oracle.marginal_distribution(rho, k);
        for (int nph = 0; nph <= 5; ++nph)
          worst = std::max(worst,
                           std::abs(fock_probability_single(at_dt, k, nph) - marginal[nph]));
      }
      out.rows.push_back({m, worst});
      out.worst_abs_err = std::max(out.worst_abs_err, worst);
    } catch (const TruncationLeak&) {
      continue;
    }
  }
  return out;
}

StabilitySweep run_stability_sweep(int modes, double g_hz, double gs_hz, double kappa_hz,
                                   int phase_points) {
  if (modes < 2) throw std::invalid_argument("run_stability_sweep: needs at least two modes");
  if (phase_points < 1)
    throw std::invalid_argument("run_stability_sweep: needs at least one phase point");
  if (!(kappa_hz > 0.0)) throw std::invalid_argument("run_stability_sweep: kappa must be positive");
  const int pairs = SystemParams::pair_count(modes);
  if (pairs > 3)
    throw std::invalid_argument("run_stability_sweep: phase grid is limited to three pairs");
  double grid = 1.0;
  for (int q = 0; q < pairs; ++q) grid *= phase_points;
  if (grid > 2.0e6) throw std::invalid_argument("run_stability_sweep: phase grid too large");

  SystemParams p = SystemParams::zero(modes);
  p.kappa.setConstant(rate_to_internal(kappa_hz));
  p.g.setConstant(rate_to_internal(g_hz));
  const double gs_mag = rate_to_internal(gs_hz);

  StabilitySweep out;
  out.grid_points = static_cast<int>(grid);
  out.worst_re_lambda_hz = -std::numeric_limits<double>::infinity();
  for (int linear = 0; linear < out.grid_points; ++linear) {
    int rem = linear;
    for (int q = 0; q < pairs; ++q) {
      const double phase = 2.0 * kPi * (rem % phase_points) / phase_points;
      rem /= phase_points;
      p.gs[q] = std::polar(gs_mag, phase);
    }
    const Eigen::ComplexEigenSolver<MatC> es(build_coupling_matrix(p), false);
    double re = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      re = std::max(re, es.eigenvalues()[i].real());
    out.worst_re_lambda_hz = std::max(out.worst_re_lambda_hz, rate_to_si(re));
    if (re > 1e-9) ++out.divergent;
  }
  return out;
}

void write_dataset_csv(const ExperimentConfig& cfg, const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) fail("cannot write " + out_path);
  out << std::setprecision(17);

  if (cfg.task == "sinesquare") {
    TrainOptions topt;
    topt.seed = cfg.seed;
    topt.eval_steps = cfg.eval_steps;
    out << "value,label\n";
    for (const WaveStep& w : make_eval_stream(topt)) out << w.value << "," << w.label << "\n";
    return;
  }

  const ExperimentSetup setup = build_experiment(cfg);
  for (int i = 0; i < setup.forward.input_dim; ++i) out << "x" << i << ",";
  out << "label,split\n";
  const auto dump = [&](const Dataset& data, const char* split) {
    for (const Sample& s : data.samples) {
      for (int i = 0; i < s.x.size(); ++i) out << s.x[i] << ",";
      out << s.label << "," << split << "\n";
    }
  };
  dump(setup.train, "train");
  dump(setup.test, "test");
}

}  // namespace bqnn
