#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "polyrefute/harness.hpp"
#include "polyrefute/parallel.hpp"

using namespace polyrefute;

namespace {

struct Raw {
  std::size_t n = 0;
  std::string m;
  std::string m_grid;
  unsigned D = 2, d = 4;
  std::size_t tau = 4;
  double scaling = 0.0;
  std::size_t trials = 0;
  double samples = 1e6;
  std::uint64_t seed = 0;
  unsigned coeff_bits = 32;
  std::size_t budget = 5000;
  double svd_cutoff = 1e-8;
  unsigned jobs = 0;
  std::string out, record, emit_cert;
};

std::uint64_t seed_fallback() {
  const char* env = std::getenv("POLYREFUTE_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(env, &pos);
    if (pos == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("POLYREFUTE_SEED is not an unsigned integer");
}

bool given(CLI::App* sc, const std::string& name) {
  const CLI::Option* o = sc->get_option_no_throw(name);
  return o && o->count() > 0;
}

int finish(const RunRecord& rec, const std::string& record_path) {
  const auto j = rec.to_json();
  if (!record_path.empty()) {
    std::ofstream f(record_path);
    if (!f) throw std::runtime_error("cannot open " + record_path + " for writing");
    f << j.dump(2) << '\n';
  }
  nlohmann::json brief = {{"command", rec.config.command}, {"status", rec.status}, {"exit_code", rec.exit_code},
                          {"summary", rec.summary}, {"wall_time", rec.wall_time}, {"digest", j.at("digest")}};
  std::cout << brief.dump(2) << '\n';
  return rec.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refutation, SOS and low-degree experiments for random polynomial systems"};
  app.require_subcommand(1);
  Raw raw;
  std::string record_in;
  double tol = 1e-9;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--seed", raw.seed, "RNG seed (falls back to POLYREFUTE_SEED)");
    sc->add_option("--out", raw.out, "Primary output file");
    sc->add_option("--record", raw.record, "Write the full run record JSON here");
    sc->add_option("--jobs", raw.jobs, "Worker threads (default: available cores)");
  };

  auto* refute = app.add_subcommand("refute", "Search for and verify a Nullstellensatz refutation");
  refute->add_option("--n", raw.n)->required();
  refute->add_option("--m", raw.m, "Equation count or 'auto'")->required();
  refute->add_option("--D", raw.D);
  refute->add_option("--d", raw.d);
  refute->add_option("--coeff-bits", raw.coeff_bits);
  refute->add_option("--trials", raw.trials);
  refute->add_option("--emit-cert", raw.emit_cert, "Write the certificate JSON here");
  common(refute);

  auto* phase2 = app.add_subcommand("phase2", "Degree-2 SOS feasibility sweep over m");
  phase2->add_option("--n", raw.n)->required();
  phase2->add_option("--m-grid", raw.m_grid, "start:stop:step or a,b,c")->required();
  phase2->add_option("--trials", raw.trials);
  phase2->add_option("--budget", raw.budget, "Projection sweeps per instance");
  common(phase2);

  auto* ldlr = app.add_subcommand("ldlr", "Exact low-degree likelihood ratio norm");
  auto* ldlr_mc = app.add_subcommand("ldlr-mc", "Monte-Carlo estimate of the low-degree norm");
  for (auto* sc : {ldlr, ldlr_mc}) {
    sc->add_option("--n", raw.n)->required();
    sc->add_option("--m", raw.m)->required();
    sc->add_option("--d", raw.d);
    sc->add_option("--D", raw.D);
    sc->add_option("--scaling", raw.scaling, "Planted scaling c (default 1/(10 d sqrt(m) log(n+1)))");
    common(sc);
  }
  ldlr_mc->add_option("--samples", raw.samples);

  auto* pseudocal = app.add_subcommand("pseudocal", "Pseudo-calibrated degree-4 moment matrix and repair");
  pseudocal->add_option("--n", raw.n)->required();
  pseudocal->add_option("--m", raw.m)->required();
  pseudocal->add_option("--tau", raw.tau);
  pseudocal->add_option("--trials", raw.trials, "Consecutive seeds to run");
  pseudocal->add_option("--svd-cutoff", raw.svd_cutoff);
  common(pseudocal);

  auto* distinguish = app.add_subcommand("distinguish", "Spectral distinguisher AUC, null vs planted");
  distinguish->add_option("--n", raw.n)->required();
  distinguish->add_option("--m", raw.m)->required();
  distinguish->add_option("--scaling", raw.scaling, "Planted scaling for the strong arm (default 1)");
  distinguish->add_option("--trials", raw.trials, "Seeds per arm");
  common(distinguish);

  auto* replay_cmd = app.add_subcommand("replay", "Rerun a run record and report drift");
  replay_cmd->add_option("record_file", record_in, "Run record JSON")->required();
  replay_cmd->add_option("--tol", tol, "Relative tolerance for floating fields");
  replay_cmd->add_option("--rerun-record", raw.record, "Write the rerun record here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (replay_cmd->parsed()) {
      std::ifstream f(record_in);
      if (!f) throw UsageError("cannot read " + record_in);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("record does not parse: ") + e.what());
      }
      const ReplayReport rep = replay(j, tol);
      if (!raw.record.empty()) std::ofstream(raw.record) << rep.rerun.to_json().dump(2) << '\n';
      nlohmann::json out = {{"ok", rep.ok}, {"drift", rep.drift}, {"rerun_exit_code", rep.rerun.exit_code}};
      std::cout << out.dump(2) << '\n';
      return rep.ok ? kExitOk : kExitVerifyFailed;
    }

    CLI::App* sc = app.get_subcommands().front();
    ExperimentConfig c;
    c.command = sc->get_name();
    c.n = raw.n;
    if (!raw.m.empty()) {
      if (raw.m == "auto") {
        c.m_auto = true;
      } else {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
          v = std::stoull(raw.m, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != raw.m.size() || raw.m[0] == '-') throw UsageError("--m must be a positive integer or 'auto'");
        c.m = static_cast<std::size_t>(v);
      }
    }
    if (!raw.m_grid.empty()) c.m_grid = parse_grid(raw.m_grid);
    c.D = raw.D;
    c.d = raw.d;
    c.tau = raw.tau;
    if (given(sc, "--scaling")) c.scaling = raw.scaling;
    if (given(sc, "--trials")) c.trials = raw.trials;
    if (given(sc, "--samples")) {
      if (!(raw.samples >= 2 && raw.samples < 1e15)) throw UsageError("--samples out of range");
      c.samples = static_cast<std::size_t>(raw.samples);
    }
    c.seed = given(sc, "--seed") ? raw.seed : seed_fallback();
    c.coeff_bits = raw.coeff_bits;
    c.budget = raw.budget;
    c.svd_cutoff = raw.svd_cutoff;
    c.jobs = raw.jobs ? raw.jobs : default_jobs();
    c.out = raw.out;
    c.emit_cert = raw.emit_cert;
    return finish(dispatch(validate(c)), raw.record);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
}
