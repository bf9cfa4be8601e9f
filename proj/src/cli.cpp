#include "ddib/cli.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "ddib/bridge.hpp"
#include "ddib/config.hpp"
#include "ddib/csv.hpp"
#include "ddib/error.hpp"
#include "ddib/experiments.hpp"
#include "ddib/model_file.hpp"
#include "ddib/odesolve.hpp"
#include "ddib/ot.hpp"
#include "ddib/plot.hpp"
#include "json.hpp"

namespace ddib {

namespace {

namespace fs = std::filesystem;

struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "Experiment config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "Override a config key: section.key=value");
  }

  ExperimentConfig load() const {
    ExperimentConfig cfg = config_file.empty() ? ExperimentConfig{} : load_config(config_file);
    for (const auto& o : overrides) apply_override(cfg, o);
    return cfg;
  }
};

// Optional per-command flags layered over the config file.
struct TrainFlags {
  std::optional<long> iterations;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<double> adam_beta1;
  std::optional<double> adam_beta2;
  std::optional<double> adam_eps;
  std::optional<double> ema_decay;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--iterations", iterations, "Adam iterations");
    cmd->add_option("--batch-size", batch_size, "Minibatch size");
    cmd->add_option("--lr", learning_rate, "Learning rate");
    cmd->add_option("--adam-beta1", adam_beta1);
    cmd->add_option("--adam-beta2", adam_beta2);
    cmd->add_option("--adam-eps", adam_eps);
    cmd->add_option("--ema-decay", ema_decay, "EMA decay of the returned weights");
    cmd->add_option("--seed", seed, "Training seed");
  }

  void apply(ExperimentConfig& cfg) const {
    if (iterations) cfg.training.iterations = *iterations;
    if (batch_size) cfg.training.batch_size = *batch_size;
    if (learning_rate) cfg.training.learning_rate = *learning_rate;
    if (adam_beta1) cfg.training.adam_beta1 = *adam_beta1;
    if (adam_beta2) cfg.training.adam_beta2 = *adam_beta2;
    if (adam_eps) cfg.training.adam_eps = *adam_eps;
    if (ema_decay) cfg.training.ema_decay = *ema_decay;
    if (seed) cfg.training.seed = *seed;
  }
};

struct ScheduleFlags {
  std::optional<int> steps;
  std::optional<double> beta_min;
  std::optional<double> beta_max;
  std::optional<std::vector<int>> hidden;
  std::optional<int> time_embed;

  void attach(CLI::App* cmd, const std::string& steps_flag) {
    cmd->add_option(steps_flag, steps, "Diffusion steps T of the noise schedule");
    cmd->add_option("--beta-min", beta_min);
    cmd->add_option("--beta-max", beta_max);
    cmd->add_option("--hidden", hidden, "Hidden layer widths")->delimiter(',');
    cmd->add_option("--time-embed", time_embed, "Time embedding width");
  }

  void apply(ExperimentConfig& cfg) const {
    if (steps) cfg.schedule.steps = *steps;
    if (beta_min) cfg.schedule.beta_min = *beta_min;
    if (beta_max) cfg.schedule.beta_max = *beta_max;
    if (hidden) cfg.network.hidden = *hidden;
    if (time_embed) cfg.network.time_embed = *time_embed;
  }
};

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kNumeric: return kExitNumeric;
  }
  return kExitData;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual diffusion implicit bridges on point clouds and images", "ddib"};
  app.require_subcommand(1);
  auto log = [&err](const std::string& msg) { err << "[ddib] " << msg << "\n"; };
  std::function<int()> action;

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a 2D toy dataset");
  std::string gen_kind, gen_out, gen_order = "index";
  std::size_t gen_n = 4000;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind, "moons, checkerboards, concentric-rings, ...")->required();
  gen->add_option("--n", gen_n, "Number of points");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out, "Output CSV")->required();
  gen->add_option("--tag-order", gen_order, "index or angle (tags follow polar angle)")
      ->check(CLI::IsMember({"index", "angle"}));
  gen->callback([&] {
    action = [&] {
      PointCloud cloud = generate(parse_dataset_kind(gen_kind), gen_n, gen_seed);
      if (gen_order == "angle") cloud = tag_by_angle(cloud);
      ensure_parent(gen_out);
      write_points_csv(gen_out, cloud);
      return kExitOk;
    };
  });

  // train
  auto* trn = app.add_subcommand("train", "Train a single-domain diffusion model");
  std::string trn_domain, trn_data, trn_out;
  long trn_log_every = 1000;
  ConfigFlags trn_cfg;
  TrainFlags trn_flags;
  ScheduleFlags trn_sched;
  trn->add_option("--domain", trn_domain, "Model name")->required();
  trn->add_option("--data", trn_data, "Training points CSV")->required();
  trn->add_option("--out", trn_out, "Model file")->required();
  trn->add_option("--log-every", trn_log_every, "Progress interval (0 = quiet)");
  trn_cfg.attach(trn);
  trn_flags.attach(trn);
  trn_sched.attach(trn, "--steps");
  trn->callback([&] {
    action = [&] {
      ExperimentConfig cfg = trn_cfg.load();
      trn_flags.apply(cfg);
      trn_sched.apply(cfg);
      cfg.validate();
      const PointCloud data = read_points_csv(trn_data);
      double window = 0.0;
      long count = 0;
      TrainObserver obs = [&](long it, double loss) {
        window += loss;
        ++count;
        if (trn_log_every > 0 && it % trn_log_every == 0) {
          log(trn_domain + " iteration " + std::to_string(it) + " loss " +
              format_real(window / static_cast<double>(count)));
          window = 0.0;
          count = 0;
        }
      };
      const DomainModel model = train_domain(trn_domain, data, cfg, cfg.training.seed, obs);
      ensure_parent(trn_out);
      save_model(trn_out, model);
      return kExitOk;
    };
  });

  // encode / decode
  struct SolveFlags {
    std::string model, points, out, trace;
    int steps = 500;
  };
  auto add_solve = [&](const char* name, const char* help, SolveFlags& f, Direction dir) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--model", f.model, "Model file")->required();
    cmd->add_option("--points", f.points, "Input CSV")->required();
    cmd->add_option("--steps", f.steps, "DDIM steps");
    cmd->add_option("--out", f.out, "Output CSV")->required();
    cmd->add_option("--trace", f.trace, "Write the full trajectory CSV here");
    cmd->callback([&, dir] {
      action = [&, dir] {
        const DomainModel model = load_model(f.model);
        const PointCloud input = read_points_csv(f.points);
        const Eigen::MatrixXd start = dir == Direction::kForward
                                          ? model.standardizer.apply(input.points)
                                          : input.points;
        const SolveResult r = ode_solve(model.net, model.schedule, start, {f.steps, dir},
                                        !f.trace.empty());
        Eigen::MatrixXd end = dir == Direction::kForward ? r.endpoint
                                                         : model.standardizer.invert(r.endpoint);
        ensure_parent(f.out);
        write_points_csv(f.out, PointCloud(std::move(end), input.tags));
        if (!f.trace.empty()) {
          ensure_parent(f.trace);
          write_text_file(f.trace, format_trace_csv(r.path_steps, r.path, input.tags));
        }
        return kExitOk;
      };
    });
  };
  SolveFlags enc_flags, dec_flags;
  add_solve("encode", "Map data points to latent codes", enc_flags, Direction::kForward);
  add_solve("decode", "Map latent codes to data points", dec_flags, Direction::kReverse);

  // translate
  auto* tr = app.add_subcommand("translate", "Translate points from one domain to another");
  std::string tr_src, tr_tgt, tr_points, tr_out, tr_report;
  int tr_steps = 500;
  tr->add_option("--src-model", tr_src)->required();
  tr->add_option("--tgt-model", tr_tgt)->required();
  tr->add_option("--points", tr_points)->required();
  tr->add_option("--steps", tr_steps, "DDIM steps");
  tr->add_option("--out", tr_out)->required();
  tr->add_option("--report", tr_report, "TranslationReport JSON");
  tr->callback([&] {
    action = [&] {
      const DomainModel src = load_model(tr_src);
      const DomainModel tgt = load_model(tr_tgt);
      const TranslationReport r = translate_with_report(src, tgt, read_points_csv(tr_points), tr_steps);
      ensure_parent(tr_out);
      write_points_csv(tr_out, PointCloud(r.target, r.tags));
      if (!tr_report.empty()) {
        ensure_parent(tr_report);
        write_text_file(tr_report, r.to_json());
      }
      return kExitOk;
    };
  });

  // cycle
  auto* cy = app.add_subcommand("cycle", "Round trip A -> B -> A and report the L2 error");
  std::string cy_a, cy_b, cy_points, cy_out;
  int cy_steps = 500;
  cy->add_option("--model-a", cy_a)->required();
  cy->add_option("--model-b", cy_b)->required();
  cy->add_option("--points", cy_points, "Points of domain A")->required();
  cy->add_option("--steps", cy_steps, "DDIM steps");
  cy->add_option("--out", cy_out, "TranslationReport JSON")->required();
  cy->callback([&] {
    action = [&] {
      const TranslationReport r =
          cycle_check(load_model(cy_a), load_model(cy_b), read_points_csv(cy_points), cy_steps);
      ensure_parent(cy_out);
      write_text_file(cy_out, r.to_json());
      out << "mean_roundtrip_l2 " << format_real(r.mean_roundtrip_l2) << "\n";
      return kExitOk;
    };
  });

  // cycle-table
  auto* ct = app.add_subcommand("cycle-table", "Cycle-consistency table over domain pairs");
  ConfigFlags ct_cfg;
  bool ct_train = false;
  std::optional<int> ct_steps;
  ct_cfg.attach(ct);
  ct->add_flag("--train", ct_train, "Train and save missing domain models");
  ct->add_option("--steps", ct_steps, "DDIM steps (overrides solve.steps)");
  ct->callback([&] {
    action = [&] {
      ExperimentConfig cfg = ct_cfg.load();
      if (ct_steps) cfg.solve.steps = *ct_steps;
      cfg.validate();
      const auto models = load_domain_models(cfg, ct_train, log);
      const CycleTable table = cycle_table(cfg, models);
      fs::create_directories(cfg.output.dir);
      write_text_file(fs::path(cfg.output.dir) / "cycle_table.csv", table.to_csv());
      write_text_file(fs::path(cfg.output.dir) / "cycle_table.txt", table.to_text());
      out << table.to_text();
      return kExitOk;
    };
  });

  // ot
  auto* ot = app.add_subcommand("ot", "Exact or entropic transport plan between two clouds");
  std::string ot_method, ot_source, ot_target, ot_out;
  SinkhornOptions ot_opts;
  ot->add_option("method", ot_method, "emd or sinkhorn")
      ->required()
      ->check(CLI::IsMember({"emd", "sinkhorn"}));
  ot->add_option("--source", ot_source)->required();
  ot->add_option("--target", ot_target)->required();
  ot->add_option("--epsilon", ot_opts.epsilon, "Entropic regularization");
  ot->add_option("--max-iters", ot_opts.max_iters);
  ot->add_option("--tol", ot_opts.tol, "Marginal violation tolerance");
  ot->add_option("--out", ot_out, "Plan JSON")->required();
  ot->callback([&] {
    action = [&] {
      const PointCloud a = read_points_csv(ot_source);
      const PointCloud b = read_points_csv(ot_target);
      const TransportPlan plan = ot_method == "emd" ? emd(a, b) : sinkhorn(a, b, ot_opts);
      nlohmann::ordered_json j;
      j["method"] = ot_method;
      if (ot_method == "sinkhorn") {
        j["epsilon"] = ot_opts.epsilon;
        j["iterations"] = plan.iterations;
        j["regularized_cost"] = plan.regularized_cost;
      }
      j["n"] = a.size();
      j["m"] = b.size();
      j["cost"] = plan.cost;
      j["marginal_violation"] = plan.marginal_violation;
      j["source_weights"] = std::vector<double>(plan.source_weights.data(),
                                                plan.source_weights.data() + plan.source_weights.size());
      j["target_weights"] = std::vector<double>(plan.target_weights.data(),
                                                plan.target_weights.data() + plan.target_weights.size());
      auto rows = nlohmann::ordered_json::array();
      for (Eigen::Index i = 0; i < plan.coupling.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(plan.coupling.cols()));
        for (Eigen::Index k = 0; k < plan.coupling.cols(); ++k) row[static_cast<std::size_t>(k)] = plan.coupling(i, k);
        rows.push_back(row);
      }
      j["coupling"] = std::move(rows);
      ensure_parent(ot_out);
      write_text_file(ot_out, j.dump(1) + "\n");
      out << "cost " << format_real(plan.cost) << "\n";
      return kExitOk;
    };
  });

  // color-transfer
  auto* cx = app.add_subcommand("color-transfer", "Example-guided color transfer");
  std::string cx_ref, cx_subj, cx_method = "ddib", cx_out, cx_report, cx_cache;
  bool cx_train = false;
  ColorTransferOptions cx_opts;
  ConfigFlags cx_cfg;
  TrainFlags cx_train_flags;
  ScheduleFlags cx_sched;
  std::optional<int> cx_solve_steps;
  cx->add_option("--reference", cx_ref, "Reference image (palette source), PPM")->required();
  cx->add_option("--subject", cx_subj, "Image to recolor, PPM")->required();
  cx->add_option("--method", cx_method, "ddib, emd, sinkhorn or linear")
      ->check(CLI::IsMember({"ddib", "emd", "sinkhorn", "linear"}));
  cx->add_option("--out", cx_out, "Output PPM")->required();
  cx->add_option("--report", cx_report, "MSE report JSON (default: <out>.json)");
  cx->add_flag("--train", cx_train, "Train per-image models missing from the cache");
  cx->add_option("--cache-dir", cx_cache, "Model cache (default $DDIB_CACHE_DIR or .ddib-cache)");
  cx->add_option("--sample-size", cx_opts.sample_size, "Pixels sampled for the OT baselines");
  cx->add_option("--ot-seed", cx_opts.seed, "Seed of the pixel subsample");
  cx->add_option("--epsilon", cx_opts.sinkhorn_epsilon, "Sinkhorn regularization");
  cx->add_option("--solve-steps", cx_solve_steps, "DDIM steps");
  cx_cfg.attach(cx);
  cx_train_flags.attach(cx);
  cx_sched.attach(cx, "--schedule-steps");
  cx->callback([&] {
    action = [&] {
      ExperimentConfig cfg = cx_cfg.load();
      cx_train_flags.apply(cfg);
      cx_sched.apply(cfg);
      if (cx_solve_steps) cfg.solve.steps = *cx_solve_steps;
      cfg.validate();
      cx_opts.config = cfg;
      cx_opts.train_if_missing = cx_train;
      cx_opts.cache_dir = cx_cache.empty() ? default_cache_dir() : fs::path(cx_cache);
      const RgbImage ref = read_ppm(cx_ref);
      const RgbImage subj = read_ppm(cx_subj);
      const ColorTransferResult r = run_color_transfer(ref, subj, cx_opts, log);
      ensure_parent(cx_out);
      write_ppm(cx_out, r.outputs.at(parse_color_method(cx_method)));
      const std::string report = cx_report.empty() ? cx_out + ".json" : cx_report;
      ensure_parent(report);
      write_text_file(report, r.to_json());
      for (const auto& [m, v] : r.mse_vs_ddib) {
        out << "mse ddib-vs-" << color_method_name(m) << " " << format_real(v) << "\n";
      }
      return kExitOk;
    };
  });

  // mse
  auto* mse = app.add_subcommand("mse", "Pixel MSE of two images in [-1,1]");
  std::string mse_a, mse_b;
  mse->add_option("--a", mse_a)->required();
  mse->add_option("--b", mse_b)->required();
  mse->callback([&] {
    action = [&] {
      out << format_real(pixel_mse(read_ppm(mse_a), read_ppm(mse_b))) << "\n";
      return kExitOk;
    };
  });

  // plot
  auto* plt = app.add_subcommand("plot", "Scatter panels (SVG), colored by point tag");
  std::vector<std::string> plt_files, plt_titles;
  std::string plt_out;
  PlotOptions plt_opts;
  plt->add_option("files", plt_files, "Point CSV files, one panel each")->required();
  plt->add_option("--titles", plt_titles, "Panel titles")->delimiter(',');
  plt->add_option("--extent", plt_opts.extent, "Half-width of every panel's viewport");
  plt->add_option("--out", plt_out, "Output SVG")->required();
  plt->callback([&] {
    action = [&] {
      std::vector<PlotPanel> panels;
      for (std::size_t i = 0; i < plt_files.size(); ++i) {
        const std::string title = i < plt_titles.size() ? plt_titles[i] : fs::path(plt_files[i]).stem().string();
        panels.push_back({title, read_points_csv(plt_files[i])});
      }
      ensure_parent(plt_out);
      write_text_file(plt_out, plot_svg(panels, plt_opts));
      return kExitOk;
    };
  });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace ddib
