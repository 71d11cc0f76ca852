#include "commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "campaign_config.hpp"
#include "oamfso/errors.hpp"
#include "oamfso/ggd.hpp"
#include "oamfso/metrics.hpp"
#include "oamfso/mimo.hpp"
#include "oamfso/sample_store.hpp"
#include "oamfso/stc.hpp"
#include "oamfso/turbulence.hpp"

namespace oamfso::cli {

namespace fs = std::filesystem;

namespace {

// Writes to the named file, or stdout for an empty path or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      const fs::path p(path);
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      file_.open(p);
      if (!file_) throw MissingInputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

IrradianceSampleSet load_store(const std::string& path) {
  const auto resolved = resolve_input(path);
  if (!fs::exists(resolved)) throw MissingInputError("no sample store at " + path);
  return store::read(resolved);
}

struct SimulateArgs {
  std::string config;
  unsigned jobs = 1;
  bool append = false;
  std::string out;
};

int simulate(const SimulateArgs& a) {
  auto cfg = load_config(a.config);
  if (!a.out.empty()) cfg.output = a.out;
  const std::string digest = channel_digest(cfg.channel, cfg.master_seed);
  std::uint64_t first_index = 0;
  if (a.append && fs::exists(cfg.output)) {
    const auto existing = store::read(cfg.output);
    if (existing.digest() != digest)
      throw ConfigError("store " + cfg.output.string() + " was produced by another configuration");
    if (existing.size() > 0) first_index = existing.realization_indices().back() + 1;
  }
  const auto start = std::chrono::steady_clock::now();
  const auto samples =
      run_monte_carlo(cfg.channel, cfg.n_realizations, cfg.master_seed, a.jobs, first_index);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (cfg.output.has_parent_path()) fs::create_directories(cfg.output.parent_path());
  if (first_index > 0)
    store::append(cfg.output, samples);
  else
    store::write(cfg.output, samples);

  fs::path manifest = cfg.output;
  manifest += ".manifest";
  std::ofstream m(manifest, a.append ? std::ios::app : std::ios::trunc);
  m << "# oamfso " << OAMFSO_VERSION << "\n"
    << "digest " << digest << "\n"
    << "seed " << cfg.master_seed << "\n"
    << "first_index " << first_index << "\n"
    << "realizations " << cfg.n_realizations << "\n"
    << "excluded " << samples.excluded() << "\n"
    << "wall_time_s " << seconds << "\n";
  std::cout << "wrote " << samples.size() << " realizations to " << cfg.output.string()
            << " (excluded " << samples.excluded() << ")\n";
  return 0;
}

struct FitArgs {
  std::string store;
  std::optional<int> m;
  std::optional<int> n;
  bool all = false;
  std::string out;
};

int fit(const FitArgs& a) {
  const auto samples = load_store(a.store);
  std::vector<FitRow> rows;
  if (a.all) {
    for (int m : samples.tx())
      for (int n : samples.rx())
        rows.push_back({m, n, ggd::fit_ml(samples.channel(m, n))});
  } else {
    if (!a.m || !a.n) throw ConfigError("fit: give --m and --n, or --all");
    rows.push_back({*a.m, *a.n, ggd::fit_ml(samples.channel(*a.m, *a.n))});
  }
  Output out(a.out);
  write_fit_table(out.stream(), rows, samples.digest());
  return 0;
}

struct MetricsArgs {
  std::string fit_table;
  std::optional<int> m;
  std::optional<int> n;
  std::string mu_grid = "0:40:2";
  std::string gamma_th = "0";
  std::string out;
};

int metrics_cmd(const MetricsArgs& a) {
  const auto path = resolve_input(a.fit_table);
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open fit table " + a.fit_table);
  std::string digest;
  const auto rows = read_fit_table(in, &digest);
  const FitRow* chosen = nullptr;
  for (const auto& r : rows) {
    if ((!a.m || r.m == *a.m) && (!a.n || r.n == *a.n)) {
      if (chosen) throw ConfigError("metrics: several fits match; select one with --m and --n");
      chosen = &r;
    }
  }
  if (!chosen) throw MissingInputError("metrics: no matching fit in " + a.fit_table);
  const auto mu = parse_grid(a.mu_grid);
  const auto th = parse_grid(a.gamma_th);
  Output out(a.out);
  metrics::write_curves(out.stream(), metrics::curves(chosen->report.params, mu, th), th,
                        digest);
  return 0;
}

struct MimoArgs {
  std::string store;
  std::vector<std::string> sets;
  std::string mu_grid = "0:40:4";
  double gamma_th_db = 0.0;
  std::string out;
  std::string correlation_out;
  std::string empirical_out;
  std::size_t bits_per_sample = 1000;
  std::uint64_t seed = 1;
};

int mimo_cmd(const MimoArgs& a) {
  const auto samples = load_store(a.store);
  std::vector<ModeSet> sets;
  for (const auto& s : a.sets) sets.emplace_back(parse_int_list(s));
  if (sets.empty()) throw ConfigError("mimo: give at least one --set");
  const auto mu = parse_grid(a.mu_grid);
  const auto report = mimo::diversity_report(sets, samples, mu, a.gamma_th_db);
  {
    Output out(a.out);
    mimo::write_report(out.stream(), report, samples.digest());
  }
  if (!a.correlation_out.empty()) {
    Output out(a.correlation_out);
    mimo::write_correlation(out.stream(), report, samples.digest());
  }
  if (!a.empirical_out.empty()) {
    Output out(a.empirical_out);
    auto& os = out.stream();
    os << "# oamfso " << OAMFSO_VERSION << "\n# digest " << samples.digest() << "\n"
       << "set_id, mu_db, ber_empirical\n";
    os.precision(17);
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const auto env = mimo::combined_envelopes(samples, sets[s]);
      for (std::size_t i = 0; i < mu.size(); ++i) {
        Rng rng = Rng::substream(a.seed, {s, i});
        os << mimo::set_id(sets[s]) << ", " << mu[i] << ", "
           << mimo::empirical_ook_ber(env, db_to_linear(mu[i]), a.bits_per_sample, rng) << "\n";
      }
    }
  }
  return 0;
}

struct StcArgs {
  std::string store;
  std::string modes = "1,2";
  std::vector<std::string> codes{"golden-light:2", "alamouti:4", "repetition:4", "uncoded:4"};
  std::string mu_grid = "0:30:3";
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::uint64_t min_errors = 100;
  std::uint64_t max_codewords = 1'000'000;
  std::string out;
  std::string codebook_out;
};

CodeSpec parse_code(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  CodeSpec spec;
  if (name == "alamouti") spec.kind = CodeKind::Alamouti;
  else if (name == "golden-light") spec.kind = CodeKind::GoldenLight;
  else if (name == "repetition") spec.kind = CodeKind::SpatialRepetition;
  else if (name == "uncoded") spec.kind = CodeKind::Uncoded;
  else throw ConfigError("unknown code '" + name + "'");
  if (colon != std::string::npos) {
    try {
      spec.pam_order = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad PAM order in '" + text + "'");
    }
  }
  return spec;
}

int stc_cmd(const StcArgs& a) {
  const auto samples = load_store(a.store);
  const ModeSet modes(parse_int_list(a.modes));
  const auto mu = parse_grid(a.mu_grid);
  stc::SimulationOptions opts{a.min_errors, a.max_codewords};
  Output out(a.out);
  auto& os = out.stream();
  os << "# oamfso " << OAMFSO_VERSION << "\n# digest " << samples.digest() << "\n"
     << "code, pam, mu_db, ber_sim, ber_bound, bit_errors, bits\n";
  os.precision(17);
  std::optional<Output> books;
  if (!a.codebook_out.empty()) books.emplace(a.codebook_out);
  for (std::size_t c = 0; c < a.codes.size(); ++c) {
    Codebook book;
    try {
      book = stc::make_codebook(parse_code(a.codes[c]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (books) stc::write_codebook(books->stream(), book);
    const auto sim = stc::simulate_ber(book, samples, modes, mu, a.seed + c, opts, a.jobs);
    std::optional<GgdParams> sum_sq;
    if (book.spec.kind == CodeKind::Alamouti && modes.size() >= 2) {
      const ModeSet used({modes[0], modes[1]});
      sum_sq = ggd::fit_ml(stc::sum_squared_gains(samples, used)).params;
    }
    for (const auto& p : sim) {
      os << to_string(book.spec.kind) << ", " << book.spec.pam_order << ", " << p.mu_db
         << ", " << p.ber << ", ";
      if (sum_sq) {
        const auto model = PepModel::from_fit(*sum_sq, std::sqrt(db_to_linear(p.mu_db)), 1.0,
                                              book.spec.modes());
        os << stc::union_bound_ber(book, model);
      }
      os << ", " << p.bit_errors << ", " << p.bits << "\n";
    }
  }
  return 0;
}

struct RegimeArgs {
  std::optional<double> cn2;
  double lambda = 850e-9;
  double distance = 1000.0;
  std::string config;
};

int regime_cmd(const RegimeArgs& a) {
  double cn2 = 0.0, lambda = a.lambda, z = a.distance;
  if (!a.config.empty()) {
    const auto cfg = load_config(a.config);
    cn2 = cfg.channel.turbulence.cn2;
    lambda = cfg.channel.lambda;
    z = cfg.channel.z_total;
  } else if (a.cn2) {
    cn2 = *a.cn2;
  } else {
    throw ConfigError("regime: give --cn2 or a config file");
  }
  double sigma = 0.0;
  try {
    sigma = turbulence::rytov_variance(cn2, lambda, z);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::cout << "rytov_variance " << sigma << "\n"
            << "regime " << to_string(turbulence::classify_regime(sigma)) << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"OAM free-space optical channel toolkit", "oamfso"};
  app.set_version_flag("--version", std::string("oamfso ") + OAMFSO_VERSION);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run a Monte Carlo propagation campaign");
  c_sim->add_option("config", sim.config, "campaign .cfg file")->required();
  c_sim->add_option("--jobs", sim.jobs, "worker threads")->check(CLI::PositiveNumber);
  c_sim->add_flag("--append", sim.append, "extend an existing store of the same configuration");
  c_sim->add_option("--out", sim.out, "store path (overrides the config)");

  FitArgs fa;
  auto* c_fit = app.add_subcommand("fit", "ML fit of channel irradiance to the GGD");
  c_fit->add_option("store", fa.store)->required();
  c_fit->add_option("--m", fa.m, "transmitted mode");
  c_fit->add_option("--n", fa.n, "received mode");
  c_fit->add_flag("--all", fa.all, "fit every channel pair");
  c_fit->add_option("--out", fa.out);

  MetricsArgs ma;
  auto* c_met = app.add_subcommand("metrics", "Capacity, outage and BER curves from a fit");
  c_met->add_option("fit_table", ma.fit_table)->required();
  c_met->add_option("--m", ma.m);
  c_met->add_option("--n", ma.n);
  c_met->add_option("--mu-db", ma.mu_grid, "average SNR grid in dB, lo:hi:step or list");
  c_met->add_option("--gamma-th-db", ma.gamma_th, "outage thresholds in dB");
  c_met->add_option("--out", ma.out);

  MimoArgs mi;
  auto* c_mimo = app.add_subcommand("mimo", "MRC diversity curves over mode sets");
  c_mimo->add_option("store", mi.store)->required();
  c_mimo->add_option("--set", mi.sets, "mode set, e.g. 1,2 (repeatable)")->required();
  c_mimo->add_option("--mu-db", mi.mu_grid);
  c_mimo->add_option("--gamma-th-db", mi.gamma_th_db);
  c_mimo->add_option("--out", mi.out);
  c_mimo->add_option("--correlation-out", mi.correlation_out);
  c_mimo->add_option("--empirical-out", mi.empirical_out, "simulated OOK BER per set");
  c_mimo->add_option("--bits-per-sample", mi.bits_per_sample);
  c_mimo->add_option("--seed", mi.seed);

  StcArgs sa;
  auto* c_stc = app.add_subcommand("stc", "Space-time code BER by simulation and union bound");
  c_stc->add_option("store", sa.store)->required();
  c_stc->add_option("--modes", sa.modes);
  c_stc->add_option("--code", sa.codes, "name:pam, e.g. alamouti:4 (repeatable)");
  c_stc->add_option("--mu-db", sa.mu_grid);
  c_stc->add_option("--seed", sa.seed);
  c_stc->add_option("--jobs", sa.jobs)->check(CLI::PositiveNumber);
  c_stc->add_option("--min-errors", sa.min_errors);
  c_stc->add_option("--max-codewords", sa.max_codewords);
  c_stc->add_option("--out", sa.out);
  c_stc->add_option("--codebook-out", sa.codebook_out);

  RegimeArgs ra;
  auto* c_reg = app.add_subcommand("regime", "Rytov variance and turbulence regime");
  c_reg->add_option("config", ra.config);
  c_reg->add_option("--cn2", ra.cn2);
  c_reg->add_option("--lambda", ra.lambda);
  c_reg->add_option("--distance", ra.distance);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) return simulate(sim);
    if (c_fit->parsed()) return fit(fa);
    if (c_met->parsed()) return metrics_cmd(ma);
    if (c_mimo->parsed()) return mimo_cmd(mi);
    if (c_stc->parsed()) return stc_cmd(sa);
    if (c_reg->parsed()) return regime_cmd(ra);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace oamfso::cli
