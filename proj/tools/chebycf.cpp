// chebycf: fit, evaluate, recommend, grid-search, export filter shapes and run
// the spectral oracle suite from the command line.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chebycf/chebyshev.hpp"
#include "chebycf/error.hpp"
#include "chebycf/evaluation.hpp"
#include "chebycf/kernels.hpp"
#include "chebycf/oracle.hpp"
#include "chebycf/pipeline.hpp"
#include "chebycf/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kInvalidInput = 4,
  kVersion = 5,
  kChecksum = 6,
  kVerifyFailed = 7,
};

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage error (unknown flag, missing or bad option value)\n"
    "  3  I/O error (missing or unreadable/unwritable file)\n"
    "  4  malformed input or invalid parameters\n"
    "  5  model file format version mismatch\n"
    "  6  model checksum mismatch (corrupt file or different dataset split)\n"
    "  7  verification failed\n"
    "\n"
    "Datasets: --dataset NAME reads $CHEBYCF_DATA_ROOT/NAME/train.txt and\n"
    "test.txt (default root ./data); --train/--test override the paths.";

struct DataArgs {
  std::string name;
  std::string train;
  std::string test;
};

struct ParamArgs {
  double phi = 1.0;
  double alpha = 0.0;
  std::size_t eta = 128;
  double beta = 0.0;
  int order = 8;
};

struct Common {
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = library default
  std::string output;
  std::string config_out;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--dataset", d.name, "Dataset directory name under the data root");
  cmd->add_option("--train", d.train, "Train adjacency-list file");
  cmd->add_option("--test", d.test, "Test adjacency-list file");
}

void add_param_options(CLI::App* cmd, ParamArgs& p) {
  cmd->add_option("--phi", p.phi, "Plateau flatness phi")->capture_default_str();
  cmd->add_option("--alpha", p.alpha, "Ideal pass weight alpha")->capture_default_str();
  cmd->add_option("--eta", p.eta, "Ideal pass rank eta")->capture_default_str();
  cmd->add_option("--beta", p.beta, "Degree normalisation power beta")
      ->capture_default_str();
  cmd->add_option("--order", p.order, "Chebyshev order K")->capture_default_str();
}

void add_common_options(CLI::App* cmd, Common& c, bool output_required) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all)")
      ->check(CLI::NonNegativeNumber);
  auto* out = cmd->add_option("--output,-o", c.output, "Output file");
  if (output_required) out->required();
  cmd->add_option("--config-out", c.config_out,
                  "Where to write the resolved config (default: <output>.config.json)");
}

struct ResolvedData {
  std::string name;
  fs::path train;
  fs::path test;
};

ResolvedData resolve_data(const DataArgs& d) {
  ResolvedData r;
  if (!d.name.empty()) {
    const char* env = std::getenv("CHEBYCF_DATA_ROOT");
    const fs::path root = env && *env ? fs::path(env) : fs::path("data");
    r.train = root / d.name / "train.txt";
    r.test = root / d.name / "test.txt";
    r.name = d.name;
  }
  if (!d.train.empty()) r.train = d.train;
  if (!d.test.empty()) r.test = d.test;
  if (r.train.empty() || r.test.empty()) {
    throw CLI::ValidationError("data", "need --dataset or both --train and --test");
  }
  if (r.name.empty()) r.name = r.train.parent_path().filename().string();
  if (r.name.empty()) r.name = r.train.stem().string();
  return r;
}

chebycf::HyperParams to_params(const ParamArgs& a) {
  chebycf::HyperParams p{a.phi, a.alpha, a.eta, a.beta, a.order};
  p.validate();
  return p;
}

json params_json(const chebycf::HyperParams& p) {
  return {{"phi", p.phi}, {"alpha", p.alpha}, {"eta", p.eta},
          {"beta", p.beta}, {"order", p.order}};
}

json data_json(const ResolvedData& d) {
  return {{"name", d.name}, {"train", d.train.string()}, {"test", d.test.string()}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw chebycf::IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw chebycf::IoError("write failure on " + path.string());
}

// Records the fully-resolved configuration next to the primary output. When
// the output goes to stdout and no --config-out is given, it goes to stderr.
void emit_config(const std::string& command, const Common& c, json body) {
  body["command"] = command;
  body["seed"] = c.seed;
  body["threads"] = chebycf::kernels::max_threads();
  body["output"] = c.output.empty() ? "-" : c.output;
  const std::string text = body.dump(2) + "\n";
  if (!c.config_out.empty()) {
    write_text(c.config_out, text);
  } else if (!c.output.empty()) {
    write_text(c.output + ".config.json", text);
  } else {
    std::cerr << "config: " << body.dump() << '\n';
  }
}

// Writes to --output, or stdout when it is empty.
void emit_output(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
  } else {
    write_text(c.output, text);
  }
}

void apply_threads(const Common& c) {
  if (c.threads > 0) chebycf::kernels::set_threads(c.threads);
}

chebycf::InteractionDataset load(const ResolvedData& d) {
  chebycf::InteractionDataset data = chebycf::load_interactions(d.train, d.test);
  if (data.duplicates_dropped > 0) {
    std::cerr << "note: dropped " << data.duplicates_dropped
              << " duplicate interactions\n";
  }
  return data;
}

std::vector<std::size_t> checked_n_values(const std::vector<std::size_t>& n) {
  for (const std::size_t v : n) {
    if (v == 0) throw chebycf::InvalidArgument("N values must be positive");
  }
  return n;
}

json n_values_json(const chebycf::EvalOptions& e) {
  return {{"n_values", e.n_values}, {"batch_size", e.batch_size}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ChebyCF: training-free graph-filter collaborative filtering"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  // fit
  DataArgs fit_data;
  ParamArgs fit_params;
  Common fit_common;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write it to --output");
  add_data_options(fit_cmd, fit_data);
  add_param_options(fit_cmd, fit_params);
  add_common_options(fit_cmd, fit_common, true);

  // evaluate
  DataArgs eval_data;
  Common eval_common;
  std::string eval_model;
  int eval_layers = 0;
  chebycf::EvalOptions eval_opts;
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Recall@N / NDCG@N of a model (or the linear low-pass baseline)");
  add_data_options(eval_cmd, eval_data);
  add_common_options(eval_cmd, eval_common, false);
  eval_cmd->add_option("--model", eval_model, "Model file written by fit or grid");
  eval_cmd->add_option("--baseline-layers", eval_layers,
                       "Evaluate the untrained linear low-pass filter with L layers "
                       "instead of a model")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--n", eval_opts.n_values, "Cutoffs N")->capture_default_str();
  eval_cmd->add_option("--batch-size", eval_opts.batch_size, "Users per batch")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // recommend
  DataArgs rec_data;
  Common rec_common;
  std::string rec_model;
  std::vector<std::int64_t> rec_users;
  std::size_t rec_top = 20;
  auto* rec_cmd = app.add_subcommand(
      "recommend", "Top-N unseen items per user: \"uid: iid iid ...\"");
  add_data_options(rec_cmd, rec_data);
  add_common_options(rec_cmd, rec_common, false);
  rec_cmd->add_option("--model", rec_model, "Model file")->required();
  rec_cmd->add_option("--users", rec_users, "External user ids (default: all)");
  rec_cmd->add_option("--top", rec_top, "N")->check(CLI::PositiveNumber)
      ->capture_default_str();

  // grid
  DataArgs grid_data;
  Common grid_common;
  std::string grid_model_out;
  chebycf::HyperGrid grid = chebycf::HyperGrid::standard();
  chebycf::GridOptions grid_opts;
  auto* grid_cmd = app.add_subcommand(
      "grid", "Grid search; writes one CSV row per combination plus a BEST row");
  add_data_options(grid_cmd, grid_data);
  add_common_options(grid_cmd, grid_common, true);
  grid_cmd->add_option("--model-out", grid_model_out,
                       "Best model file (default: <output>.best.model)");
  grid_cmd->add_option("--phi-values", grid.phi, "phi axis (default 1..20 step 0.5)");
  grid_cmd->add_option("--alpha-values", grid.alpha, "alpha axis (default 0..0.5)");
  grid_cmd->add_option("--eta-values", grid.eta, "eta axis (default 128..2048)");
  grid_cmd->add_option("--beta-values", grid.beta, "beta axis (default 0..0.5)");
  grid_cmd->add_option("--order-values", grid.order, "K axis (default 8)");
  grid_cmd->add_option("--n", grid_opts.eval.n_values, "Cutoffs N")
      ->capture_default_str();
  grid_cmd->add_option("--select-n", grid_opts.n_select,
                       "Selection metric Recall@N")->capture_default_str();
  grid_cmd->add_option("--batch-size", grid_opts.eval.batch_size, "Users per batch")
      ->check(CLI::PositiveNumber);
  bool grid_quiet = false;
  grid_cmd->add_flag("--quiet", grid_quiet, "No progress on stderr");

  // export-filter
  ParamArgs exp_params;
  Common exp_common;
  int exp_layers = 0;
  auto* exp_cmd = app.add_subcommand(
      "export-filter",
      "Transfer function on 1,001 rescaled frequencies, CSV \"lambda,weight\"");
  exp_cmd->add_option("--phi", exp_params.phi, "Plateau flatness phi")
      ->capture_default_str();
  exp_cmd->add_option("--order", exp_params.order, "Chebyshev order K")
      ->capture_default_str();
  exp_cmd->add_option("--baseline-layers", exp_layers,
                      "Export the linear low-pass filter with L layers instead")
      ->check(CLI::PositiveNumber);
  add_common_options(exp_cmd, exp_common, false);

  // verify
  chebycf::verify::VerifyOptions ver_opts;
  Common ver_common;
  auto* ver_cmd = app.add_subcommand(
      "verify", "Run the dense spectral oracle suite on seeded random graphs");
  add_common_options(ver_cmd, ver_common, false);
  ver_cmd->add_option("--instances", ver_opts.instances, "Random graphs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*fit_cmd) {
      apply_threads(fit_common);
      const ResolvedData d = resolve_data(fit_data);
      const chebycf::HyperParams p = to_params(fit_params);
      const chebycf::InteractionDataset data = load(d);
      chebycf::SvdOptions svd;
      const chebycf::ChebyCFModel model = chebycf::fit(data, p, fit_common.seed, svd);
      chebycf::save_model(model, fit_common.output);
      json cfg{{"data", data_json(d)}, {"params", params_json(p)},
               {"svd", {{"tol", svd.tol}, {"max_iters", svd.max_iters},
                        {"oversample", svd.oversample}}}};
      if (model.ideal) {
        cfg["svd"]["converged"] = model.ideal->converged;
        cfg["svd"]["iterations"] = model.ideal->iterations;
      }
      emit_config("fit", fit_common, cfg);
      return kOk;
    }

    if (*eval_cmd) {
      apply_threads(eval_common);
      const ResolvedData d = resolve_data(eval_data);
      eval_opts.n_values = checked_n_values(eval_opts.n_values);
      const chebycf::InteractionDataset data = load(d);
      chebycf::MetricsReport report;
      json cfg{{"data", data_json(d)}, {"eval", n_values_json(eval_opts)}};
      std::string label = d.name;
      if (eval_layers > 0) {
        if (!eval_model.empty()) {
          throw CLI::ValidationError("--model", "cannot be combined with --baseline-layers");
        }
        const chebycf::NormalizedGraph g = chebycf::normalize(data);
        report = chebycf::evaluate_scorer(
            data,
            [&](const chebycf::SignalBlock& x) {
              return chebycf::oracle::linear_lowpass_filter(g, eval_layers, x);
            },
            eval_opts);
        report.params = chebycf::HyperParams{0.0, 0.0, 0, 0.0, eval_layers};
        label += "/linear-" + std::to_string(eval_layers);
        cfg["baseline_layers"] = eval_layers;
      } else {
        if (eval_model.empty()) {
          throw CLI::ValidationError("--model", "required unless --baseline-layers");
        }
        const chebycf::ChebyCFModel model = chebycf::load_model(eval_model);
        report = chebycf::evaluate(model, data, eval_opts);
        cfg["model"] = eval_model;
        cfg["params"] = params_json(model.params);
      }
      emit_output(eval_common, std::string(chebycf::kMetricsCsvHeader) + "\n" +
                                   chebycf::metrics_csv_row(label, report) + "\n");
      emit_config("evaluate", eval_common, cfg);
      return kOk;
    }

    if (*rec_cmd) {
      apply_threads(rec_common);
      const ResolvedData d = resolve_data(rec_data);
      const chebycf::InteractionDataset data = load(d);
      const chebycf::ChebyCFModel model = chebycf::load_model(rec_model);
      if (model.dataset_checksum != data.checksum()) {
        throw chebycf::ChecksumMismatch("model was fitted on a different dataset split");
      }
      std::vector<std::size_t> users;
      if (rec_users.empty()) {
        for (std::size_t u = 0; u < data.num_users; ++u) users.push_back(u);
      } else {
        for (const std::int64_t id : rec_users) {
          const auto it = std::lower_bound(data.user_ids.begin(), data.user_ids.end(), id);
          if (it == data.user_ids.end() || *it != id) {
            throw chebycf::InvalidArgument("unknown user id " + std::to_string(id));
          }
          users.push_back(static_cast<std::size_t>(it - data.user_ids.begin()));
        }
      }
      std::ostringstream out;
      for (const std::size_t u : users) {
        const auto top =
            chebycf::recommend_topn(model, data.train_signal(u), rec_top);
        out << data.user_ids[u] << ':';
        for (const auto& s : top) out << ' ' << data.item_ids[s.item];
        out << '\n';
      }
      emit_output(rec_common, out.str());
      emit_config("recommend", rec_common,
                  {{"data", data_json(d)}, {"model", rec_model},
                   {"params", params_json(model.params)}, {"top", rec_top},
                   {"users", rec_users}});
      return kOk;
    }

    if (*grid_cmd) {
      apply_threads(grid_common);
      const ResolvedData d = resolve_data(grid_data);
      grid_opts.eval.n_values = checked_n_values(grid_opts.eval.n_values);
      if (std::find(grid_opts.eval.n_values.begin(), grid_opts.eval.n_values.end(),
                    grid_opts.n_select) == grid_opts.eval.n_values.end()) {
        throw CLI::ValidationError("--select-n", "must be one of the --n cutoffs");
      }
      grid_opts.seed = grid_common.seed;
      grid_opts.svd.seed = grid_common.seed;
      if (!grid_quiet) {
        grid_opts.progress = [](std::size_t done, std::size_t total) {
          std::cerr << "\rgrid: " << done << "/" << total << std::flush;
          if (done == total) std::cerr << '\n';
        };
      }
      const chebycf::InteractionDataset data = load(d);
      const chebycf::GridResult result = chebycf::grid_search(data, grid, grid_opts);
      std::ostringstream csv;
      csv << chebycf::kMetricsCsvHeader << '\n';
      for (const auto& r : result.reports) {
        csv << chebycf::metrics_csv_row(d.name, r) << '\n';
      }
      csv << chebycf::metrics_csv_row("BEST", result.reports[result.best_index]) << '\n';
      emit_output(grid_common, csv.str());

      const std::string model_out =
          grid_model_out.empty() ? grid_common.output + ".best.model" : grid_model_out;
      const chebycf::ChebyCFModel best =
          chebycf::fit(data, result.best(), grid_common.seed, grid_opts.svd);
      chebycf::save_model(best, model_out);
      emit_config("grid", grid_common,
                  {{"data", data_json(d)},
                   {"grid", {{"phi", grid.phi}, {"alpha", grid.alpha},
                             {"eta", grid.eta}, {"beta", grid.beta},
                             {"order", grid.order}}},
                   {"eval", n_values_json(grid_opts.eval)},
                   {"select_n", grid_opts.n_select},
                   {"best", params_json(result.best())},
                   {"model_out", model_out}});
      return kOk;
    }

    if (*exp_cmd) {
      std::ostringstream csv;
      csv << "lambda,weight\n";
      json cfg;
      std::function<double(double)> h;
      if (exp_layers > 0) {
        const auto t = chebycf::oracle::linear_lowpass_transfer(exp_layers);
        h = [t](double x) { return t((x + 1.0) / 2.0); };
        cfg["baseline_layers"] = exp_layers;
      } else {
        const auto spec = chebycf::ChebyFilterSpec::plateau(exp_params.phi,
                                                            exp_params.order);
        h = [spec](double x) { return spec.transfer(x); };
        cfg["phi"] = exp_params.phi;
        cfg["order"] = exp_params.order;
      }
      constexpr int kPoints = 1001;
      for (int i = 0; i < kPoints; ++i) {
        // Exact grid: -1 + 2i/1000, so i = 500 is exactly 0.
        const double x = static_cast<double>(2 * i - (kPoints - 1)) / (kPoints - 1);
        csv << chebycf::format_number(x) << ',' << chebycf::format_number(h(x)) << '\n';
      }
      emit_output(exp_common, csv.str());
      cfg["points"] = kPoints;
      emit_config("export-filter", exp_common, cfg);
      return kOk;
    }

    if (*ver_cmd) {
      apply_threads(ver_common);
      ver_opts.seed = ver_common.seed;
      const auto results = chebycf::verify::run_verification(ver_opts);
      std::ostringstream report;
      chebycf::verify::write_report(report, results);
      emit_output(ver_common, report.str());
      emit_config("verify", ver_common, {{"instances", ver_opts.instances}});
      for (const auto& r : results) {
        if (!r.passed()) return kVerifyFailed;
      }
      return kOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const chebycf::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const chebycf::VersionMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVersion;
  } catch (const chebycf::ChecksumMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kChecksum;
  } catch (const chebycf::Error& e) {  // parse, validation, invalid argument
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
