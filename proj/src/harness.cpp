#include "polyrefute/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyrefute/distributions.hpp"
#include "polyrefute/lowdeg.hpp"
#include "polyrefute/parallel.hpp"
#include "polyrefute/pseudocal.hpp"
#include "polyrefute/refuter.hpp"
#include "polyrefute/rng.hpp"
#include "polyrefute/sos2.hpp"

#ifndef POLYREFUTE_BUILD_ID
#define POLYREFUTE_BUILD_ID "unknown"
#endif

namespace polyrefute {

using nlohmann::json;

namespace {

const char* const kCommands[] = {"refute", "phase2", "ldlr", "ldlr-mc", "pseudocal", "distinguish"};

void require(bool cond, const std::string& what) {
  if (!cond) throw UsageError(what);
}

std::size_t trials_or(const ExperimentConfig& c, std::size_t fallback) { return c.trials.value_or(fallback); }

std::size_t need_m(const ExperimentConfig& c) {
  require(c.m.has_value(), c.command + ": --m is required");
  return *c.m;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << bytes;
}

// --- subcommands --------------------------------------------------------

void run_refute(const ExperimentConfig& c, RunRecord& rec) {
  const std::size_t m = need_m(c), trials = trials_or(c, 1);
  std::size_t refuted = 0, verified = 0, not_found = 0, degenerate = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(c.seed, t);
    const RationalSystem sys = sample_null_rational_system(c.n, m, c.D, NiceRationalSpec{c.coeff_bits}, rng);
    const RefutationResult res = find_refutation(sys, c.d);
    json tr = {{"trial", t},
               {"status", to_string(res.status)},
               {"matrix_rows", res.matrix_rows},
               {"matrix_cols", res.matrix_cols},
               {"rank", res.rank.rank},
               {"rank_method", res.rank.method}};
    if (res.status == RefuteStatus::Refuted) {
      ++refuted;
      const VerifyReport vr = verify_refutation(sys, *res.cert);
      tr["verified"] = vr.ok;
      if (!vr.ok) tr["diagnostic"] = vr.diagnostic;
      if (vr.ok) ++verified;
      const std::string bytes = certificate_to_json(*res.cert).dump();
      tr["certificate_digest"] = fnv1a_hex(bytes);
      tr["pivot_equation"] = res.pivot_equation;
      if (t == 0) rec.artifacts["certificate"] = bytes;
    } else if (res.status == RefuteStatus::AllRhsZero) {
      ++degenerate;
    } else {
      ++not_found;
    }
    rec.trials.push_back(std::move(tr));
  }
  rec.summary = {{"m", m},           {"trials", trials},         {"refuted", refuted},
                 {"verified", verified}, {"not_found", not_found}, {"all_rhs_zero", degenerate}};
  if (verified != refuted) {
    rec.exit_code = kExitVerifyFailed;
    rec.status = "verification-failed";
  } else if (degenerate > 0) {
    rec.exit_code = kExitDegenerate;
    rec.status = "degenerate";
  } else if (not_found > 0) {
    rec.exit_code = kExitNegative;
    rec.status = "not-found";
  } else {
    rec.status = "refuted";
  }
  if (!c.emit_cert.empty() && rec.artifacts.count("certificate")) write_file(c.emit_cert, rec.artifacts["certificate"]);
}

void run_phase2(const ExperimentConfig& c, RunRecord& rec) {
  const std::size_t trials = trials_or(c, 50);
  const SweepResult r = phase_sweep(c.n, c.m_grid, trials, c.seed, c.jobs, c.budget);
  for (const auto& row : r.rows)
    rec.trials.push_back({{"m", row.m},
                          {"trials", row.trials},
                          {"feasible", row.feasible},
                          {"infeasible", row.infeasible},
                          {"inconclusive", row.inconclusive},
                          {"mean_iters", row.mean_iters}});
  rec.summary = {{"n", r.n}, {"rows", r.rows.size()}, {"crossover", r.crossover ? json(*r.crossover) : json(nullptr)}};
  rec.artifacts["sweep.csv"] = sweep_csv(r);
  rec.status = "ok";
}

double scaling_for(const ExperimentConfig& c, std::size_t m) {
  return c.scaling.value_or(default_scaling(c.n, m, c.d));
}

json ldlr_json(const LdlrReport& r) {
  json per = json::object();
  for (const auto& [k, v] : r.per_edge_count) per[std::to_string(k)] = v;
  return {{"n", r.n},          {"m", r.m},           {"d", r.d},
          {"D", r.D},          {"scaling", r.scaling}, {"total", r.total},
          {"per_edge_count", per}, {"terms", r.terms}, {"advantage_bound", r.advantage_bound()}};
}

void run_ldlr(const ExperimentConfig& c, RunRecord& rec) {
  const std::size_t m = need_m(c);
  const LdlrReport r = ldlr_norm_squared(c.n, m, c.d, c.D, scaling_for(c, m));
  rec.trials.push_back(ldlr_json(r));
  double parts = 1.0;
  for (const auto& [k, v] : r.per_edge_count) parts += v;
  const bool ok = std::isfinite(r.total) && r.total >= 1.0 && std::abs(parts - r.total) <= 1e-12 * r.total;
  rec.summary = {{"total", r.total}, {"breakdown_consistent", ok}};
  rec.artifacts["report.json"] = rec.trials.back().dump(2);
  rec.exit_code = ok ? kExitOk : kExitVerifyFailed;
  rec.status = ok ? "ok" : "verification-failed";
}

void run_ldlr_mc(const ExperimentConfig& c, RunRecord& rec) {
  const std::size_t m = need_m(c);
  const double s = scaling_for(c, m);
  const LdlrMonteCarlo mc = ldlr_monte_carlo(c.n, m, c.d, c.D, s, c.samples, c.seed, c.jobs);
  json tr = {{"scaling", s}, {"total", mc.total}, {"stderr", mc.stderr_}, {"samples", mc.samples}};
  bool ok = std::isfinite(mc.total);
  if (alpha_enumeration_size(c.n, m, c.d, c.D) <= static_cast<double>(kEnumerationCap)) {
    const double exact = ldlr_norm_squared(c.n, m, c.d, c.D, s).total;
    const double z = mc.stderr_ > 0 ? (mc.total - exact) / mc.stderr_ : 0.0;
    tr["closed_form"] = exact;
    tr["z_score"] = z;
    ok = ok && std::abs(z) <= 4.0;
  }
  rec.trials.push_back(tr);
  rec.summary = {{"total", mc.total}, {"stderr", mc.stderr_}, {"oracle_agrees", ok}};
  rec.artifacts["report.json"] = tr.dump(2);
  rec.exit_code = ok ? kExitOk : kExitVerifyFailed;
  rec.status = ok ? "ok" : "verification-failed";
}

void run_pseudocal_cmd(const ExperimentConfig& c, RunRecord& rec) {
  const std::size_t m = need_m(c), trials = trials_or(c, 1);
  std::vector<PseudocalRun> runs(trials);
  parallel_for(trials, c.jobs, [&](std::size_t t) { runs[t] = run_pseudocal(c.n, m, c.tau, c.seed + t, c.svd_cutoff); });
  bool ok = true;
  json arr = json::array();
  for (const auto& run : runs) {
    const auto& rp = run.report.repair;
    const double limit = 1e-8 * rp.q_norm * std::max(run.pe.values.norm(), 1e-300);
    const bool pass = run.report.odd_blocks_zero && rp.residual_after <= limit;
    ok = ok && pass;
    json j = spectrum_json(run);
    j["verified"] = pass;
    rec.trials.push_back(j);
    arr.push_back(j);
  }
  rec.summary = {{"trials", trials}, {"verified", ok}};
  rec.artifacts["spectrum.json"] = (trials == 1 ? arr[0] : arr).dump(2);
  rec.exit_code = ok ? kExitOk : kExitVerifyFailed;
  rec.status = ok ? "ok" : "verification-failed";
}

void run_distinguish(const ExperimentConfig& c, RunRecord& rec) {
  const std::size_t m = need_m(c), trials = trials_or(c, 50);
  const double c_alt = c.scaling.value_or(1.0);
  const double c_tiny = default_scaling(c.n, m, 2);
  std::vector<double> null_s(trials), alt_s(trials), tiny_s(trials);
  parallel_for(trials, c.jobs, [&](std::size_t t) {
    Rng r0 = make_rng(c.seed, 3 * t), r1 = make_rng(c.seed, 3 * t + 1), r2 = make_rng(c.seed, 3 * t + 2);
    null_s[t] = spectral_distinguisher(sample_null_gaussian_system(c.n, m, 2, r0));
    alt_s[t] = spectral_distinguisher(sample_planted_system(c.n, m, 2, c_alt, r1).first);
    tiny_s[t] = spectral_distinguisher(sample_planted_system(c.n, m, 2, c_tiny, r2).first);
  });
  for (std::size_t t = 0; t < trials; ++t)
    rec.trials.push_back({{"trial", t}, {"null", null_s[t]}, {"planted", alt_s[t]}, {"planted_default", tiny_s[t]}});
  rec.summary = {{"scaling", c_alt},
                 {"default_scaling", c_tiny},
                 {"auc", auc(null_s, alt_s)},
                 {"auc_default", auc(null_s, tiny_s)},
                 {"null_median", quantile(null_s, 0.5)},
                 {"null_q05", quantile(null_s, 0.05)},
                 {"null_q95", quantile(null_s, 0.95)},
                 {"null_q99", quantile(null_s, 0.99)}};
  rec.artifacts["report.json"] = rec.summary.dump(2);
  rec.status = "ok";
}

// Recursive comparison; numbers that are not integers compare with rel_tol.
void compare(const json& a, const json& b, const std::string& path, double rel_tol, std::vector<std::string>& drift) {
  if (a.is_number_float() || b.is_number_float()) {
    if (!a.is_number() || !b.is_number()) {
      drift.push_back(path + ": type changed");
      return;
    }
    const double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) > rel_tol * std::max({1.0, std::abs(x), std::abs(y)}))
      drift.push_back(path + ": " + a.dump() + " -> " + b.dump());
    return;
  }
  if (a.type() != b.type()) {
    drift.push_back(path + ": " + a.dump() + " -> " + b.dump());
    return;
  }
  if (a.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k))
        drift.push_back(path + "." + k + ": missing");
      else
        compare(v, b.at(k), path + "." + k, rel_tol, drift);
    }
    for (const auto& [k, v] : b.items())
      if (!a.contains(k)) drift.push_back(path + "." + k + ": unexpected");
    return;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) {
      drift.push_back(path + ": length " + std::to_string(a.size()) + " -> " + std::to_string(b.size()));
      return;
    }
    for (std::size_t i = 0; i < a.size(); ++i) compare(a[i], b[i], path + "[" + std::to_string(i) + "]", rel_tol, drift);
    return;
  }
  if (a != b) drift.push_back(path + ": " + a.dump() + " -> " + b.dump());
}

}  // namespace

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> out;
  auto num = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      throw UsageError("m-grid: bad number '" + s + "'");
    }
    if (pos != s.size() || s.empty() || s[0] == '-') throw UsageError("m-grid: bad number '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    require(parts.size() == 3, "m-grid: expected start:stop:step");
    const std::size_t a = num(parts[0]), b = num(parts[1]), s = num(parts[2]);
    require(s > 0, "m-grid: step must be positive");
    require(a <= b, "m-grid: start must not exceed stop");
    for (std::size_t v = a; v <= b; v += s) out.push_back(v);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
  }
  require(!out.empty(), "m-grid: empty grid");
  return out;
}

std::string build_id() { return POLYREFUTE_BUILD_ID; }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json config_to_json(const ExperimentConfig& c) {
  return {{"command", c.command},
          {"n", c.n},
          {"m", c.m ? json(*c.m) : json(nullptr)},
          {"m_auto", c.m_auto},
          {"m_grid", c.m_grid},
          {"D", c.D},
          {"d", c.d},
          {"tau", c.tau},
          {"scaling", c.scaling ? json(*c.scaling) : json(nullptr)},
          {"trials", c.trials ? json(*c.trials) : json(nullptr)},
          {"samples", c.samples},
          {"seed", c.seed},
          {"coeff_bits", c.coeff_bits},
          {"budget", c.budget},
          {"svd_cutoff", c.svd_cutoff},
          {"jobs", c.jobs},
          {"out", c.out},
          {"emit_cert", c.emit_cert}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.command = j.at("command").get<std::string>();
  c.n = j.at("n").get<std::size_t>();
  if (!j.at("m").is_null()) c.m = j.at("m").get<std::size_t>();
  c.m_auto = j.value("m_auto", false);
  c.m_grid = j.value("m_grid", std::vector<std::size_t>{});
  c.D = j.at("D").get<unsigned>();
  c.d = j.at("d").get<unsigned>();
  c.tau = j.at("tau").get<std::size_t>();
  if (!j.at("scaling").is_null()) c.scaling = j.at("scaling").get<double>();
  if (!j.at("trials").is_null()) c.trials = j.at("trials").get<std::size_t>();
  c.samples = j.at("samples").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.coeff_bits = j.at("coeff_bits").get<unsigned>();
  c.budget = j.at("budget").get<std::size_t>();
  c.svd_cutoff = j.at("svd_cutoff").get<double>();
  c.jobs = j.value("jobs", 1u);
  c.out = j.value("out", std::string{});
  c.emit_cert = j.value("emit_cert", std::string{});
  return c;
}

ExperimentConfig validate(ExperimentConfig c) {
  bool known = false;
  for (const char* k : kCommands) known = known || c.command == k;
  require(known, "unknown subcommand '" + c.command + "'");
  require(c.n >= 1, c.command + ": n must be at least 1");
  require(c.jobs >= 1, c.command + ": jobs must be at least 1");
  if (c.trials) require(*c.trials >= 1, c.command + ": trials must be at least 1");
  if (c.scaling) require(std::isfinite(*c.scaling), c.command + ": scaling must be finite");
  require(!c.m_auto || c.command == "refute", c.command + ": --m auto is only defined for refute");

  if (c.command == "refute") {
    require(c.D >= 1 && c.D <= c.d, "refute: need 1 <= D <= d");
    require(c.d % c.D == 0, "refute: D must divide d");
    require(c.coeff_bits >= 8 && c.coeff_bits <= 62, "refute: coeff-bits must lie in [8, 62]");
    if (c.m_auto) {
      require(c.D >= 2 && c.d <= c.n, "refute: --m auto needs 2 <= D <= d <= n");
      c.m = required_m(c.n, c.D, c.d);
    }
    require(c.m && *c.m >= 1, "refute: m must be at least 1");
  } else if (c.command == "phase2") {
    require(!c.m_grid.empty(), "phase2: --m-grid is required");
    require(c.budget >= 1, "phase2: budget must be positive");
  } else if (c.command == "ldlr" || c.command == "ldlr-mc") {
    require(c.m && *c.m >= 1, c.command + ": m must be at least 1");
    require(c.D >= 2, c.command + ": D must be at least 2");
    require(alpha_enumeration_size(c.n, *c.m, c.d, c.D) <= static_cast<double>(kEnumerationCap) || c.command == "ldlr-mc",
            "ldlr: enumeration exceeds the cap of 1e7 graphs (estimate " +
                std::to_string(alpha_enumeration_size(c.n, *c.m, c.d, c.D)) + ")");
    if (c.command == "ldlr-mc") require(c.samples >= 2, "ldlr-mc: samples must be at least 2");
  } else if (c.command == "pseudocal") {
    require(c.n >= 2 && c.n <= 22, "pseudocal: n must lie in [2, 22]");
    require(c.m && *c.m >= 1, "pseudocal: m must be at least 1");
    require(c.svd_cutoff > 0 && c.svd_cutoff < 1, "pseudocal: svd cutoff must lie in (0, 1)");
  } else if (c.command == "distinguish") {
    require(c.m && *c.m >= 1, "distinguish: m must be at least 1");
    require(!c.trials || *c.trials >= 2, "distinguish: need at least 2 trials per arm");
  }
  return c;
}

json RunRecord::to_json() const {
  return {{"schema_version", kSchemaVersion},
          {"schema", config.command},
          {"config", config_to_json(config)},
          {"build", build},
          {"wall_time", wall_time},
          {"exit_code", exit_code},
          {"status", status},
          {"trials", trials},
          {"summary", summary},
          {"artifacts", artifacts},
          {"digest", digest()}};
}

RunRecord RunRecord::from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw std::runtime_error("run record: unsupported schema_version");
  RunRecord r;
  r.config = config_from_json(j.at("config"));
  r.build = j.value("build", std::string{});
  r.wall_time = j.value("wall_time", 0.0);
  r.exit_code = j.at("exit_code").get<int>();
  r.status = j.value("status", std::string{});
  r.trials = j.at("trials");
  r.summary = j.at("summary");
  r.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  return r;
}

std::string RunRecord::digest() const {
  json body = {{"config", config_to_json(config)}, {"trials", trials}, {"summary", summary}, {"artifacts", artifacts}};
  return fnv1a_hex(body.dump());
}

RunRecord dispatch(const ExperimentConfig& config) {
  RunRecord rec;
  rec.config = config;
  rec.build = build_id();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string& cmd = config.command;
  if (cmd == "refute")
    run_refute(config, rec);
  else if (cmd == "phase2")
    run_phase2(config, rec);
  else if (cmd == "ldlr")
    run_ldlr(config, rec);
  else if (cmd == "ldlr-mc")
    run_ldlr_mc(config, rec);
  else if (cmd == "pseudocal")
    run_pseudocal_cmd(config, rec);
  else if (cmd == "distinguish")
    run_distinguish(config, rec);
  else
    throw UsageError("unknown subcommand '" + cmd + "'");
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!config.out.empty()) {
    const char* key = cmd == "phase2" ? "sweep.csv" : cmd == "pseudocal" ? "spectrum.json" : cmd == "refute" ? "" : "report.json";
    if (*key && rec.artifacts.count(key))
      write_file(config.out, rec.artifacts.at(key));
    else
      write_file(config.out, rec.to_json().dump(2));
  }
  return rec;
}

ReplayReport replay(const json& record, double rel_tol) {
  ReplayReport rep;
  const RunRecord orig = RunRecord::from_json(record);
  if (record.contains("digest") && record.at("digest").get<std::string>() != orig.digest())
    rep.drift.push_back("digest: record contents do not match the stored digest");
  ExperimentConfig cfg = orig.config;
  cfg.out.clear();
  cfg.emit_cert.clear();
  rep.rerun = dispatch(validate(cfg));
  rep.rerun.config = orig.config;
  if (rep.rerun.exit_code != orig.exit_code)
    rep.drift.push_back("exit_code: " + std::to_string(orig.exit_code) + " -> " + std::to_string(rep.rerun.exit_code));
  compare(orig.trials, rep.rerun.trials, "trials", rel_tol, rep.drift);
  compare(orig.summary, rep.rerun.summary, "summary", rel_tol, rep.drift);
  for (const auto& [name, bytes] : orig.artifacts) {
    auto it = rep.rerun.artifacts.find(name);
    if (it == rep.rerun.artifacts.end())
      rep.drift.push_back("artifact " + name + ": missing on rerun");
    else if (name == "certificate" || name == "sweep.csv") {
      if (it->second != bytes) rep.drift.push_back("artifact " + name + ": bytes differ");
    }
  }
  rep.ok = rep.drift.empty();
  return rep;
}

}  // namespace polyrefute
