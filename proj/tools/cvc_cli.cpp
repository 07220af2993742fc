// cvc: command-line driver for cross-validation with confidence.
//
//   cvc select   --csv data.csv --response y [--candidates lasso|subsets|all-subsets]
//   cvc simulate sim1|sim2 [--n 40,160,640] [--reps 100]
//   cvc holdout  --csv data.csv --response y --train-size 300 --reps 100
//
// Every command writes <out>/report.json and plot-ready tables under
// <out>/tables/. Exit codes: 0 ok, 2 configuration, 3 data, 4 numerical.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "cvc/cvc.hpp"

namespace fs = std::filesystem;
using cvc::json;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kFit = 4 };

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw cvc::Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[md[k] >> 4]);
    out.push_back(hex[md[k] & 0xF]);
  }
  return out;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Options shared by every command that runs the procedure.
struct CommonOptions {
  int folds = 5;
  double alpha = 0.05;
  std::optional<double> alpha_prime;
  int bootstrap = 200;
  std::string seed_text;
  bool no_screen = false;
  unsigned threads = 1;
  std::string out = "cvc-out";

  std::uint64_t seed = 0;
  std::string seed_source;

  void add_to(CLI::App& app) {
    app.add_option("--folds", folds, "number of folds V")->capture_default_str();
    app.add_option("--alpha", alpha, "test level")->capture_default_str();
    app.add_option("--alpha-prime", alpha_prime, "screening level (default alpha/10)");
    app.add_option("--bootstrap", bootstrap, "bootstrap replicates B")->capture_default_str();
    app.add_option("--seed", seed_text, "random seed (falls back to CVC_SEED, else drawn)");
    app.add_flag("--no-screen", no_screen, "disable the inequality screening step");
    app.add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--out", out, "output directory")->capture_default_str();
  }

  void resolve_seed() {
    std::string text = seed_text;
    seed_source = "flag";
    if (text.empty()) {
      if (const char* env = std::getenv("CVC_SEED"); env && *env) {
        text = env;
        seed_source = "env";
      }
    }
    if (text.empty()) {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      seed_source = "random";
      return;
    }
    try {
      std::size_t pos = 0;
      seed = std::stoull(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw cvc::ConfigError("seed must be a nonnegative integer, got '" + text + "'");
    }
  }

  cvc::CvcConfig cvc_config() const {
    cvc::CvcConfig c;
    c.folds = folds;
    c.alpha = alpha;
    c.alpha_prime = alpha_prime;
    c.screen = !no_screen;
    c.B = bootstrap;
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

json make_manifest(const std::vector<std::string>& argv, const CommonOptions& common,
                   json config, const std::vector<std::string>& inputs,
                   const std::string& started) {
  json in = json::array();
  for (const auto& path : inputs) {
    const auto bytes = cvc::read_file(path);
    in.push_back({{"path", path}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  return {{"command", argv},
          {"version", CVC_VERSION},
          {"seed", common.seed},
          {"seed_source", common.seed_source},
          {"config", std::move(config)},
          {"inputs", std::move(in)},
          {"started_at", started},
          {"finished_at", utc_now()}};
}

void write_report(const fs::path& out, const json& report) {
  fs::create_directories(out);
  std::ofstream f(out / "report.json", std::ios::binary);
  f << report.dump(2) << '\n';
  if (!f) throw cvc::Error("cannot write " + (out / "report.json").string());
}

std::ofstream open_table(const fs::path& out, const std::string& name) {
  fs::create_directories(out / "tables");
  std::ofstream f(out / "tables" / name, std::ios::binary);
  if (!f) throw cvc::Error("cannot write table " + name);
  return f;
}

std::string label(const cvc::CandidateModel& c, const std::vector<std::string>& names) {
  if (c.is_lambda()) return cvc::format_number(c.lambda());
  std::string s;
  for (int t : c.subset().terms) {
    if (!s.empty()) s += '+';
    s += t == 0 ? std::string("(Intercept)") : names[static_cast<std::size_t>(t - 1)];
  }
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// One candidate per non-empty line: comma-separated feature names. The
// intercept is always included; "(Intercept)" alone gives the null model.
std::vector<cvc::CandidateModel> read_subsets(const std::string& path,
                                              const std::vector<std::string>& names) {
  std::istringstream in(cvc::read_file(path));
  std::vector<cvc::CandidateModel> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::set<int> cols;
    std::istringstream tokens(line);
    std::string tok;
    while (std::getline(tokens, tok, ',')) {
      tok = trim(tok);
      if (tok.empty() || tok == "(Intercept)") continue;
      const auto it = std::find(names.begin(), names.end(), tok);
      if (it == names.end())
        throw cvc::ConfigError("subsets file: unknown feature '" + tok + "'");
      cols.insert(static_cast<int>(it - names.begin()));
    }
    out.push_back({static_cast<int>(out.size()),
                   cvc::SubsetSpec::from_features({cols.begin(), cols.end()})});
  }
  if (out.empty()) throw cvc::ConfigError("subsets file lists no candidates");
  return out;
}

// ---------------------------------------------------------------------------
// select
// ---------------------------------------------------------------------------

struct SelectOptions {
  std::string csv;
  std::string response;
  std::string candidates = "lasso";
  std::string subsets_file;
  int path_length = 50;
  bool no_standardize = false;
  std::optional<double> split;
};

int run_select(const SelectOptions& opt, CommonOptions& common,
               const std::vector<std::string>& argv) {
  const auto started = utc_now();
  common.resolve_seed();
  auto cfg = common.cvc_config();
  if (opt.split) {
    cfg.mode = cvc::SplitMode::sample_split;
    cfg.train_fraction = *opt.split;
  }
  cfg.validate();

  const auto table = cvc::parse_csv(cvc::read_file(opt.csv));
  cvc::Dataset data = cvc::dataset_from_csv(table, opt.response);
  if (!opt.no_standardize) data = cvc::standardize(std::move(data));

  std::vector<cvc::CandidateModel> candidates;
  std::optional<cvc::LambdaPath> path;
  if (opt.candidates == "lasso") {
    path = cvc::lasso_path(data, opt.path_length);
    candidates = cvc::lambda_candidates(path->values);
  } else if (opt.candidates == "all-subsets") {
    if (data.p() > 15) throw cvc::ConfigError("all-subsets supports at most 15 features");
    candidates = cvc::enumerate_subsets(static_cast<int>(data.p()) + 1);
  } else {
    if (opt.subsets_file.empty())
      throw cvc::ConfigError("--candidates subsets needs --subsets-file");
    candidates = read_subsets(opt.subsets_file, data.feature_names);
  }
  cvc::validate_candidates(candidates, data.p() + 1);

  const auto plan = cvc::plan_for(cfg, data.n());
  cvc::LossMatrix L;
  if (path) L = cvc::compute_loss_matrix(data, candidates, plan, cvc::LassoPathFitter{},
                                         cvc::SquaredLoss{}, cfg.threads);
  else L = cvc::compute_loss_matrix(data, candidates, plan, cvc::OlsSubsetFitter{},
                                    cvc::SquaredLoss{}, cfg.threads);
  const auto res = cvc::cvc_evaluate(L, cfg, candidates);

  json result = cvc::to_json(res, candidates, data.feature_names);
  result["n"] = data.n();
  result["p"] = data.p();
  result["response"] = data.response_name;
  result["validation_rows"] = L.rows();
  result["unconverged_fits"] = L.unconverged_fits;
  const int chosen = *res.parsimonious_choice;
  json final_fit;
  if (path) {
    result["lambda_max"] = path->lambda_max;
    result["one_se_choice"] = cvc::one_se_rule(L, candidates);
    const double lambda_hat = candidates[static_cast<std::size_t>(chosen)].lambda();
    const double train_share = cfg.mode == cvc::SplitMode::v_fold
                                   ? 1.0 - 1.0 / static_cast<double>(cfg.folds)
                                   : static_cast<double>(data.n() - L.rows()) /
                                         static_cast<double>(data.n());
    const double refit = std::sqrt(train_share) * lambda_hat;
    final_fit = cvc::to_json(cvc::fit_lasso(data, refit), data.feature_names);
    final_fit["lambda"] = refit;
  } else {
    final_fit = cvc::to_json(cvc::fit_ols_subset(data, candidates[static_cast<std::size_t>(chosen)]),
                             data.feature_names);
  }
  final_fit["candidate"] = chosen;
  final_fit["scale"] = opt.no_standardize ? "original" : "standardized";
  result["final_model"] = std::move(final_fit);

  json config = cvc::to_json(cfg);
  config["csv"] = opt.csv;
  config["response"] = opt.response;
  config["candidates"] = opt.candidates;
  if (!opt.subsets_file.empty()) config["subsets_file"] = opt.subsets_file;
  if (path) config["path_length"] = opt.path_length;
  config["standardize"] = !opt.no_standardize;
  config["threads"] = cfg.threads;
  std::vector<std::string> inputs{opt.csv};
  if (!opt.subsets_file.empty()) inputs.push_back(opt.subsets_file);

  const fs::path out(common.out);
  write_report(out, cvc::make_report("select",
                                     make_manifest(argv, common, std::move(config), inputs, started),
                                     std::move(result)));
  auto f = open_table(out, "candidates.csv");
  cvc::CsvWriter w(f);
  w.row({"candidate", "mean_loss", "p_value", "in_set", "screen_kept"});
  for (std::size_t m = 0; m < candidates.size(); ++m)
    w.row({label(candidates[m], data.feature_names),
           cvc::format_number(res.loss_means(static_cast<Eigen::Index>(m))),
           cvc::format_number(res.pvalues[m].p_value),
           res.contains(static_cast<int>(m)) ? "1" : "0",
           std::to_string(res.pvalues[m].screen.kept.size())});

  std::cout << "confidence set: " << res.confidence_set.size() << " of " << candidates.size()
            << " candidates; cv choice " << label(candidates[static_cast<std::size_t>(res.cv_choice)], data.feature_names)
            << "; cvc choice " << label(candidates[static_cast<std::size_t>(chosen)], data.feature_names)
            << "\nwrote " << (out / "report.json").string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string sim;
  std::vector<std::size_t> n;
  int reps = 100;
  std::vector<std::string> noise{"gaussian"};
  std::vector<double> noise_scale{1.0};
  long p = 200;
  std::vector<std::string> sigma{"identity", "correlated"};
  std::vector<std::string> beta{"sparse", "dense"};
  int path_length = 50;
};

int run_simulate(SimulateOptions opt, CommonOptions& common,
                 const std::vector<std::string>& argv) {
  const auto started = utc_now();
  common.resolve_seed();
  if (opt.reps < 1) throw cvc::ConfigError("--reps must be positive");
  const auto base = common.cvc_config();
  base.validate();
  const fs::path out(common.out);
  json settings = json::array();
  json config{{"sim", opt.sim}, {"reps", opt.reps}, {"cvc", cvc::to_json(base)},
              {"threads", base.threads}};

  if (opt.sim == "sim1") {
    if (opt.n.empty()) opt.n = {40, 160, 640};
    config["n"] = opt.n;
    config["noise"] = opt.noise;
    config["noise_scale"] = opt.noise_scale;
    auto f = open_table(out, "sim1.csv");
    cvc::CsvWriter w(f);
    w.row({"setting", "n", "method", "correct_rate", "mean_set_size", "median_set_size"});
    for (const auto& noise : opt.noise) {
      for (double scale : opt.noise_scale) {
        const std::string setting = noise + "-scale" + cvc::format_number(scale);
        for (auto n : opt.n) {
          cvc::Sim1Config c;
          c.n = n;
          c.noise = noise == "t3" ? cvc::NoiseKind::student_t3 : cvc::NoiseKind::gaussian;
          c.noise_scale = scale;
          c.reps = opt.reps;
          c.seed = common.seed;
          c.folds = base.folds;
          c.alpha = base.alpha;
          c.alpha_prime = base.alpha_prime;
          c.screen = base.screen;
          c.B = base.B;
          c.threads = base.threads;
          const auto rep = cvc::run_sim1(c);
          json s = cvc::to_json(rep);
          s["setting"] = setting;
          settings.push_back(std::move(s));
          const auto nn = std::to_string(n);
          w.row({setting, nn, "cv", cvc::format_number(rep.cv_rate), "NA", "NA"});
          w.row({setting, nn, "cvc", cvc::format_number(rep.cvc_rate),
                 cvc::format_number(rep.mean_set_size), cvc::format_number(rep.median_set_size)});
        }
      }
    }
  } else {
    if (opt.n.empty()) opt.n = {200};
    config["n"] = opt.n;
    config["p"] = opt.p;
    config["sigma"] = opt.sigma;
    config["beta"] = opt.beta;
    config["path_length"] = opt.path_length;
    auto f = open_table(out, "sim2.csv");
    cvc::CsvWriter w(f);
    w.row({"setting", "method", "median_risk", "median_size", "coverage", "median_set_size"});
    for (const auto& sigma : opt.sigma) {
      for (const auto& beta : opt.beta) {
        for (auto n : opt.n) {
          cvc::Sim2Config c;
          c.n = n;
          c.p = opt.p;
          c.sigma = sigma == "identity" ? cvc::SigmaKind::identity : cvc::SigmaKind::correlated;
          c.beta = beta == "sparse" ? cvc::BetaKind::sparse : cvc::BetaKind::dense;
          c.reps = opt.reps;
          c.K = opt.path_length;
          c.seed = common.seed;
          c.folds = base.folds;
          c.alpha = base.alpha;
          c.alpha_prime = base.alpha_prime;
          c.screen = base.screen;
          c.B = base.B;
          c.threads = base.threads;
          const auto rep = cvc::run_sim2(c);
          const std::string setting = sigma + "-" + beta + "-n" + std::to_string(n) + "-p" +
                                      std::to_string(opt.p);
          json s = cvc::to_json(rep);
          s["setting"] = setting;
          settings.push_back(std::move(s));
          auto row = [&](const char* method, const cvc::MethodSummary& m, bool cvc_row) {
            w.row({setting, method, cvc::format_number(m.median_risk),
                   cvc::format_number(m.median_size),
                   cvc_row ? cvc::format_number(rep.coverage) : "NA",
                   cvc_row ? cvc::format_number(rep.median_set_size) : "NA"});
          };
          row("cv", rep.cv, false);
          row("cvc", rep.cvc, true);
          row("1se", rep.one_se, false);
        }
      }
    }
  }

  json result{{"sim", opt.sim}, {"settings", std::move(settings)}};
  write_report(out, cvc::make_report("simulate",
                                     make_manifest(argv, common, std::move(config), {}, started),
                                     std::move(result)));
  std::cout << "wrote " << (out / "report.json").string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// holdout
// ---------------------------------------------------------------------------

struct HoldoutOptions {
  std::string csv;
  std::string response;
  std::size_t train_size = 300;
  int reps = 100;
  int path_length = 50;
  bool no_standardize = false;
};

int run_holdout_cmd(const HoldoutOptions& opt, CommonOptions& common,
                    const std::vector<std::string>& argv) {
  const auto started = utc_now();
  common.resolve_seed();
  const auto base = common.cvc_config();
  base.validate();

  const auto table = cvc::parse_csv(cvc::read_file(opt.csv));
  cvc::Dataset data = cvc::dataset_from_csv(table, opt.response);
  if (!opt.no_standardize) data = cvc::standardize(std::move(data));

  cvc::HoldoutConfig c;
  c.train_size = opt.train_size;
  c.reps = opt.reps;
  c.K = opt.path_length;
  c.seed = common.seed;
  c.folds = base.folds;
  c.alpha = base.alpha;
  c.alpha_prime = base.alpha_prime;
  c.screen = base.screen;
  c.B = base.B;
  c.threads = base.threads;
  const auto rep = cvc::run_holdout(data, c);

  json config = cvc::to_json(c);
  config["csv"] = opt.csv;
  config["response"] = opt.response;
  config["standardize"] = !opt.no_standardize;
  config["threads"] = c.threads;
  json result = cvc::to_json(rep);
  result["n"] = data.n();
  result["p"] = data.p();

  const fs::path out(common.out);
  write_report(out, cvc::make_report("holdout",
                                     make_manifest(argv, common, std::move(config), {opt.csv}, started),
                                     std::move(result)));
  {
    auto f = open_table(out, "holdout_reps.csv");
    cvc::CsvWriter w(f);
    w.row({"rep", "method", "lambda", "test_error", "size", "set_size"});
    for (std::size_t r = 0; r < rep.records.size(); ++r) {
      const auto& rec = rep.records[r];
      auto row = [&](const char* method, const cvc::MethodOutcome& o) {
        w.row({std::to_string(r), method, cvc::format_number(o.lambda),
               cvc::format_number(o.risk), std::to_string(o.size),
               std::to_string(rec.set_size)});
      };
      row("cv", rec.cv);
      row("cvc", rec.cvc);
      row("1se", rec.one_se);
    }
  }
  {
    auto f = open_table(out, "holdout_summary.csv");
    cvc::CsvWriter w(f);
    w.row({"method", "median_test_error", "median_size"});
    w.row({"cv", cvc::format_number(rep.cv.median_risk), cvc::format_number(rep.cv.median_size)});
    w.row({"cvc", cvc::format_number(rep.cvc.median_risk), cvc::format_number(rep.cvc.median_size)});
    w.row({"1se", cvc::format_number(rep.one_se.median_risk),
           cvc::format_number(rep.one_se.median_size)});
  }
  std::cout << "wrote " << (out / "report.json").string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Cross-validation with confidence"};
  app.set_version_flag("--version", std::string(CVC_VERSION));
  app.require_subcommand(1);

  CommonOptions common;
  SelectOptions sel;
  auto* select = app.add_subcommand("select", "confidence set of candidates on a CSV dataset");
  select->add_option("--csv", sel.csv, "input CSV with a header row")->required();
  select->add_option("--response", sel.response, "response column name or 0-based index")
      ->required();
  select->add_option("--candidates", sel.candidates, "lasso, subsets or all-subsets")
      ->check(CLI::IsMember({"lasso", "subsets", "all-subsets"}))
      ->capture_default_str();
  select->add_option("--subsets-file", sel.subsets_file,
                     "one candidate per line, comma-separated feature names");
  select->add_option("--path-length", sel.path_length, "number of lambda values")
      ->capture_default_str();
  select->add_flag("--no-standardize", sel.no_standardize, "use the columns as given");
  select->add_option("--split", sel.split,
                     "single train/test split with this training fraction instead of V folds");
  common.add_to(*select);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "run a simulation study");
  simulate->add_option("sim", sim.sim, "sim1 (subset selection) or sim2 (lasso tuning)")
      ->required()
      ->check(CLI::IsMember({"sim1", "sim2"}));
  simulate->add_option("--n", sim.n, "sample sizes, comma separated")->delimiter(',');
  simulate->add_option("--reps", sim.reps, "replicates per setting")->capture_default_str();
  simulate->add_option("--noise", sim.noise, "sim1 noise: gaussian and/or t3")
      ->delimiter(',')
      ->check(CLI::IsMember({"gaussian", "t3"}));
  simulate->add_option("--noise-scale", sim.noise_scale, "sim1 noise multipliers (1 or 2)")
      ->delimiter(',');
  simulate->add_option("--p", sim.p, "sim2 dimension")->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "sim2 covariance: identity and/or correlated")
      ->delimiter(',')
      ->check(CLI::IsMember({"identity", "correlated"}));
  simulate->add_option("--beta", sim.beta, "sim2 coefficients: sparse and/or dense")
      ->delimiter(',')
      ->check(CLI::IsMember({"sparse", "dense"}));
  simulate->add_option("--path-length", sim.path_length, "sim2 lambda values")
      ->capture_default_str();
  common.add_to(*simulate);

  HoldoutOptions hold;
  auto* holdout = app.add_subcommand("holdout", "repeated train/hold-out comparison of cv, cvc and 1se");
  holdout->add_option("--csv", hold.csv, "input CSV with a header row")->required();
  holdout->add_option("--response", hold.response, "response column name or 0-based index")
      ->required();
  holdout->add_option("--train-size", hold.train_size, "training rows per split")
      ->capture_default_str();
  holdout->add_option("--reps", hold.reps, "number of splits")->capture_default_str();
  holdout->add_option("--path-length", hold.path_length, "number of lambda values")
      ->capture_default_str();
  holdout->add_flag("--no-standardize", hold.no_standardize, "use the columns as given");
  common.add_to(*holdout);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kOk;
    for (auto* sub : app.get_subcommands())
      std::cerr << sub->help();
    return kConfig;
  }

  try {
    if (select->parsed()) return run_select(sel, common, args);
    if (simulate->parsed()) return run_simulate(sim, common, args);
    return run_holdout_cmd(hold, common, args);
  } catch (const cvc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const cvc::NoCompetitorsError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const cvc::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const cvc::DegenerateInputError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const cvc::FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kFit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFit;
  }
}
