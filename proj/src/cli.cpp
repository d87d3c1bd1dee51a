#include "aue/cli.hpp"

#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "aue/engagement.hpp"
#include "aue/error.hpp"
#include "aue/evaluation.hpp"
#include "aue/ingestion.hpp"
#include "aue/pspi.hpp"
#include "aue/regressor.hpp"
#include "text.hpp"

namespace aue::cli {
namespace {

struct Common {
  std::string out;
  bool quiet = false;
  std::uint64_t seed = 0;
};

struct Hyper {
  int epochs = 100;
  double lr = 0.01;
  int batch = 8;
  double dropout = TrainConfig{}.dropout_rate;
  double beta = 1.0;
};

void add_out(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output file")->required();
  cmd->add_flag("--quiet", c.quiet, "Suppress the summary on standard output");
}

void add_seed(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for every random draw (required)")->required();
}

void add_hyper(CLI::App* cmd, Hyper& h) {
  cmd->add_option("--epochs", h.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", h.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch", h.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--dropout", h.dropout, "Hidden-layer dropout rate")->capture_default_str();
  cmd->add_option("--beta", h.beta, "Smooth-L1 transition point")->capture_default_str();
}

TrainConfig train_config(const Hyper& h, std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = h.epochs;
  tc.learning_rate = h.lr;
  tc.batch_size = h.batch;
  tc.dropout_rate = h.dropout;
  tc.smooth_l1_beta = h.beta;
  tc.seed = seed;
  tc.validate();
  return tc;
}

AuColumnMapping mapping_from(const std::string& path, bool clamp) {
  AuColumnMapping m = path.empty() ? AuColumnMapping::defaults() : AuColumnMapping::load(path);
  if (clamp) m.clamp = true;
  return m;
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  for (auto item : text::split(csv, ',')) {
    const auto v = text::parse_int<int>(item);
    if (!v) throw UsageError("--sizes must be a comma-separated list of integers");
    sizes.push_back(*v);
  }
  return sizes;
}

void warn_all(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::string ranking_line(const EngagementProfile& p) {
  std::string s;
  for (AUId au : p.ranking) s += (s.empty() ? "" : " > ") + au_name(au);
  return s;
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Usage: return kExitUsage;
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Numeric: return kExitNumeric;
  }
  return kExitNumeric;
}

}  // namespace

CommandResult run(std::span<const std::string> argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Engagement-weighted AU pain assessment toolkit", "aue"};
  app.require_subcommand(1);
  CommandResult result;

  Common common;
  Hyper hyper;
  std::string manifest_path, folds_path, au_path, au_map_path, profile_path, model_path;
  std::string json_path, history_path, mode = "binary", method = "aue-weighted", sizes, scheme;
  bool clamp = false, unweighted = false, levels = false;
  int k = 7, k_min = 1, k_max = 12, fold = -1;
  double validation_fraction = 0.2;

  auto* split = app.add_subcommand("split", "Assign subjects to disjoint folds");
  split->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  split->add_option("--sizes", sizes, "Comma-separated fold sizes, e.g. 16,16,16,16,12")->required();
  add_seed(split, common);
  add_out(split, common);

  auto* engage = app.add_subcommand("engage", "Compute the AU engagement profile from activation maps");
  engage->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  engage->add_option("--folds", folds_path, "Folds file; with --exclude-fold restricts to training subjects");
  engage->add_option("--exclude-fold", fold, "Fold whose subjects are left out");
  engage->add_option("--au-map", au_map_path, "AU column mapping file");
  engage->add_flag("--clamp", clamp, "Clamp AU intensities into [0, 5]");
  add_out(engage, common);

  auto* pspi_cmd = app.add_subcommand("pspi", "Score frames with the PSPI formula");
  pspi_cmd->add_option("--au", au_path, "AU intensity CSV")->required();
  pspi_cmd->add_option("--mode", mode, "Eye-closure handling")
      ->check(CLI::IsMember({"binary", "intensity"}))
      ->capture_default_str();
  pspi_cmd->add_option("--au-map", au_map_path, "AU column mapping file");
  pspi_cmd->add_flag("--clamp", clamp, "Clamp AU intensities into [0, 5]");
  add_out(pspi_cmd, common);

  auto* select = app.add_subcommand("select", "Top-k core-AU ablation over folds");
  select->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  select->add_option("--folds", folds_path, "Folds file")->required();
  select->add_option("--k-min", k_min, "Smallest k")->capture_default_str();
  select->add_option("--k-max", k_max, "Largest k")->capture_default_str();
  select->add_option("--profile", profile_path, "Fixed engagement profile (default: per-fold from maps)");
  select->add_option("--au-map", au_map_path, "AU column mapping file");
  select->add_flag("--clamp", clamp, "Clamp AU intensities into [0, 5]");
  select->add_flag("--unweighted", unweighted, "Disable engagement weighting");
  select->add_flag("--levels", levels, "Regress level indices instead of raw labels");
  add_hyper(select, hyper);
  add_seed(select, common);
  add_out(select, common);

  auto* train_cmd = app.add_subcommand("train", "Train the engagement-weighted regressor");
  train_cmd->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  train_cmd->add_option("--k", k, "Number of core AUs")->required()->check(CLI::Range(1, 12));
  train_cmd->add_option("--profile", profile_path, "Engagement profile")->required();
  train_cmd->add_option("--folds", folds_path, "Folds file (with --val-fold)");
  train_cmd->add_option("--val-fold", fold, "Fold used for model selection; excluded from training");
  train_cmd->add_option("--history", history_path, "Write per-epoch losses here");
  train_cmd->add_option("--au-map", au_map_path, "AU column mapping file");
  train_cmd->add_flag("--clamp", clamp, "Clamp AU intensities into [0, 5]");
  train_cmd->add_flag("--unweighted", unweighted, "Disable engagement weighting");
  train_cmd->add_flag("--levels", levels, "Regress level indices instead of raw labels");
  add_hyper(train_cmd, hyper);
  add_seed(train_cmd, common);
  add_out(train_cmd, common);

  auto* score = app.add_subcommand("score", "Predict pain intensity with a trained model");
  score->add_option("--model", model_path, "Model file")->required();
  score->add_option("--au", au_path, "AU intensity CSV")->required();
  score->add_option("--scheme", scheme, "Also emit the pain level under this scheme")
      ->check(CLI::IsMember({"FLACC4", "NFCS2", "BINARY"}));
  score->add_option("--au-map", au_map_path, "AU column mapping file");
  score->add_flag("--clamp", clamp, "Clamp AU intensities into [0, 5]");
  add_out(score, common);

  auto* eval = app.add_subcommand("eval", "Subject-disjoint cross-validation of a method");
  eval->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  eval->add_option("--folds", folds_path, "Folds file")->required();
  eval->add_option("--method", method, "Method to evaluate")
      ->check(CLI::IsMember({"pspi", "aue", "aue-weighted"}))
      ->capture_default_str();
  eval->add_option("--k", k, "Number of core AUs")->check(CLI::Range(1, 12))->capture_default_str();
  eval->add_option("--profile", profile_path, "Fixed engagement profile (default: per-fold from maps)");
  eval->add_option("--mode", mode, "PSPI eye-closure handling")
      ->check(CLI::IsMember({"binary", "intensity"}))
      ->capture_default_str();
  eval->add_option("--validation-fraction", validation_fraction,
                   "Share of training subjects held out for model selection")
      ->capture_default_str();
  eval->add_option("--json", json_path, "Also write a machine-readable report");
  eval->add_option("--au-map", au_map_path, "AU column mapping file");
  eval->add_flag("--clamp", clamp, "Clamp AU intensities into [0, 5]");
  eval->add_flag("--levels", levels, "Regress level indices instead of raw labels");
  add_hyper(eval, hyper);
  add_seed(eval, common);
  add_out(eval, common);

  std::vector<const char*> args{"aue"};
  for (const auto& a : argv) args.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      result.exit_code = code == 0 ? kExitOk : kExitUsage;
      return result;
    }

    const auto emit = [&](const std::string& line) {
      if (!common.quiet) out << line << '\n';
    };
    const auto wrote = [&](const std::filesystem::path& p) { result.artifacts.push_back(p); };

    if (split->parsed()) {
      const auto manifest = load_manifest(manifest_path);
      const auto fold_sizes = parse_sizes(sizes);
      const auto spec = subject_folds(manifest, fold_sizes, common.seed);
      write_folds(spec, common.out);
      wrote(common.out);
      emit("wrote " + std::to_string(spec.folds.size()) + " folds (" + sizes + " subjects) to " + common.out);
    } else if (engage->parsed()) {
      const auto manifest = load_manifest(manifest_path);
      const auto dataset = load_dataset(manifest, mapping_from(au_map_path, clamp));
      warn_all(dataset.warnings, err);
      std::vector<std::size_t> frames;
      if (!folds_path.empty() && fold >= 0) {
        const auto splits = fold_splits(dataset, load_folds(folds_path));
        if (static_cast<std::size_t>(fold) >= splits.size()) throw UsageError("--exclude-fold out of range");
        frames = splits[static_cast<std::size_t>(fold)].train;
      } else if (!folds_path.empty() || fold >= 0) {
        throw UsageError("--folds and --exclude-fold go together");
      } else {
        frames.resize(dataset.frames.size());
        std::iota(frames.begin(), frames.end(), std::size_t{0});
      }
      const auto profile = dataset_engagement(dataset, frames);
      write_profile(profile, common.out);
      wrote(common.out);
      emit("engagement over " + std::to_string(profile.frame_count) + " frames: " + ranking_line(profile));
    } else if (pspi_cmd->parsed()) {
      const auto table = load_au_intensities(au_path, mapping_from(au_map_path, clamp));
      warn_all(table.warnings, err);
      const EyeClosureMode eye = mode == "binary" ? EyeClosureMode::Binary : EyeClosureMode::Intensity;
      std::string body = "# frame_id pspi\n";
      for (std::size_t i = 0; i < table.frame_ids.size(); ++i) {
        body += table.frame_ids[i] + ' ' + text::format_exact(pspi(table.vectors[i], eye)) + '\n';
      }
      text::write_file(common.out, body);
      wrote(common.out);
      emit("scored " + std::to_string(table.frame_ids.size()) + " frames (" + mode + " eye closure)");
    } else if (select->parsed()) {
      if (k_min > k_max) throw UsageError("--k-min exceeds --k-max");
      const auto dataset = load_dataset(load_manifest(manifest_path), mapping_from(au_map_path, clamp));
      warn_all(dataset.warnings, err);
      PipelineConfig pc;
      pc.method = unweighted ? Method::Aue : Method::AueWeighted;
      pc.train = train_config(hyper, common.seed);
      pc.regress_levels = levels;
      if (!profile_path.empty()) pc.fixed_profile = load_profile(profile_path);
      std::vector<int> ks(static_cast<std::size_t>(k_max - k_min + 1));
      std::iota(ks.begin(), ks.end(), k_min);
      const auto ablation = ablate_top_k(dataset, load_folds(folds_path), ks, pc);
      text::write_file(common.out, format_ablation(ablation));
      wrote(common.out);
      emit("best k = " + std::to_string(ablation.best_k) + " (mean validation loss " +
           text::format_fixed(ablation.mean_loss.at(ablation.best_k), 4) + ")");
    } else if (train_cmd->parsed()) {
      const auto dataset = load_dataset(load_manifest(manifest_path), mapping_from(au_map_path, clamp));
      warn_all(dataset.warnings, err);
      const auto profile = load_profile(profile_path);
      std::vector<TrainingSample> fit;
      std::vector<TrainingSample> val;
      if (!folds_path.empty() && fold >= 0) {
        const auto splits = fold_splits(dataset, load_folds(folds_path));
        if (static_cast<std::size_t>(fold) >= splits.size()) throw UsageError("--val-fold out of range");
        for (auto i : splits[static_cast<std::size_t>(fold)].train) {
          fit.push_back({dataset.frames[i].au, regression_target(dataset.frames[i], levels)});
        }
        for (auto i : splits[static_cast<std::size_t>(fold)].test) {
          val.push_back({dataset.frames[i].au, regression_target(dataset.frames[i], levels)});
        }
      } else if (!folds_path.empty() || fold >= 0) {
        throw UsageError("--folds and --val-fold go together");
      } else {
        for (const auto& f : dataset.frames) fit.push_back({f.au, regression_target(f, levels)});
      }
      TrainConfig tc = train_config(hyper, common.seed);
      tc.use_engagement_weights = !unweighted;
      const auto trained = train(fit, val, profile, k, tc);
      write_model(trained.model, common.out);
      wrote(common.out);
      if (!history_path.empty()) {
        std::string h = "# epoch train_loss validation_loss\n";
        for (std::size_t e = 0; e < trained.history.train_loss.size(); ++e) {
          h += std::to_string(e + 1) + ' ' + text::format_exact(trained.history.train_loss[e]) + ' ' +
               text::format_exact(trained.history.validation_loss[e]) + '\n';
        }
        text::write_file(history_path, h);
        wrote(history_path);
      }
      std::string aus;
      for (AUId au : trained.model.core_aus) aus += ' ' + au_name(au);
      emit("trained on " + std::to_string(fit.size()) + " frames, core AUs:" + aus + ", best epoch " +
           std::to_string(trained.best_epoch) + ", validation loss " +
           text::format_fixed(trained.best_validation_loss, 4));
    } else if (score->parsed()) {
      const auto model = load_model(model_path);
      const auto table = load_au_intensities(au_path, mapping_from(au_map_path, clamp));
      warn_all(table.warnings, err);
      const std::optional<LabelScheme> sch = scheme.empty() ? std::nullopt : parse_scheme(scheme);
      std::string body = sch ? "# frame_id prediction level\n" : "# frame_id prediction\n";
      for (std::size_t i = 0; i < table.frame_ids.size(); ++i) {
        const double y = predict(model, table.vectors[i]);
        body += table.frame_ids[i] + ' ' + text::format_exact(y);
        if (sch) body += ' ' + std::to_string(prediction_level(y, *sch));
        body += '\n';
      }
      text::write_file(common.out, body);
      wrote(common.out);
      emit("scored " + std::to_string(table.frame_ids.size()) + " frames");
    } else if (eval->parsed()) {
      const auto dataset = load_dataset(load_manifest(manifest_path), mapping_from(au_map_path, clamp));
      warn_all(dataset.warnings, err);
      PipelineConfig pc;
      pc.method = *parse_method(method);
      pc.k = k;
      pc.train = train_config(hyper, common.seed);
      pc.eye_mode = mode == "binary" ? EyeClosureMode::Binary : EyeClosureMode::Intensity;
      pc.validation_fraction = validation_fraction;
      pc.regress_levels = levels;
      if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw UsageError("--validation-fraction must be in [0, 1)");
      }
      if (!profile_path.empty()) pc.fixed_profile = load_profile(profile_path);
      const auto cv = cross_validate(dataset, load_folds(folds_path), pc);
      std::vector<std::pair<std::string, MetricReport>> rows;
      for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        rows.emplace_back(method + " fold " + std::to_string(f), cv.folds[f].report);
      }
      rows.emplace_back(method + " mean", cv.mean);
      text::write_file(common.out, format_report_table(rows));
      wrote(common.out);
      if (!json_path.empty()) {
        text::write_file(json_path, format_report_json(rows));
        wrote(json_path);
      }
      emit(format_report_table(std::span(rows).last(1)));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = exit_code_for(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = kExitNumeric;
  }
  return result;
}

}  // namespace aue::cli
