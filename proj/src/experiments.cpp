#include "ddib/experiments.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "ddib/bridge.hpp"
#include "ddib/csv.hpp"
#include "ddib/error.hpp"
#include "json.hpp"

namespace ddib {

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  return splitmix64(base ^ fnv1a(label));
}

PointCloud domain_training_data(DatasetKind kind, const ExperimentConfig& cfg) {
  return generate(kind, cfg.training.points,
                  derive_seed(cfg.datasets.seed, "train/" + dataset_name(kind)));
}

PointCloud domain_eval_data(DatasetKind kind, const ExperimentConfig& cfg,
                            std::size_t n) {
  return generate(kind, n, derive_seed(cfg.datasets.seed, "eval/" + dataset_name(kind)));
}

DomainModel train_domain(const std::string& name, const PointCloud& raw_data,
                         const ExperimentConfig& cfg, std::uint64_t seed,
                         const TrainObserver& observer) {
  const Standardized st = standardize(raw_data);
  const NoiseSchedule schedule = cfg.make_schedule();
  const ScoreNetwork init = ScoreNetwork::initialized(cfg.network_shape(raw_data.dim()),
                                                      derive_seed(seed, "init"));
  ScoreNetwork net = train(init, schedule, st.cloud, cfg.train_config(seed), observer);
  return DomainModel{name, schedule, std::move(net), st.standardizer, seed};
}

DomainModel train_dataset_model(DatasetKind kind, const ExperimentConfig& cfg,
                                const TrainObserver& observer) {
  return train_domain(dataset_name(kind), domain_training_data(kind, cfg), cfg,
                      derive_seed(cfg.training.seed, dataset_name(kind)), observer);
}

std::filesystem::path model_path(const ExperimentConfig& cfg, DatasetKind kind) {
  return std::filesystem::path(cfg.output.models) / (dataset_name(kind) + ".json");
}

std::string CycleTable::to_csv() const {
  std::string out = "pair,source,target,mean_l2,points,steps\n";
  for (const auto& r : rows) {
    out += dataset_code(r.a) + "<->" + dataset_code(r.b) + "," + dataset_name(r.a) + "," +
           dataset_name(r.b) + "," + format_real(r.mean_l2) + "," + std::to_string(r.points) +
           "," + std::to_string(r.n_steps) + "\n";
  }
  return out;
}

std::string CycleTable::to_text() const {
  std::string header;
  std::string values;
  for (const auto& r : rows) {
    std::string label = dataset_code(r.a) + " <-> " + dataset_code(r.b);
    std::string value = fixed(r.mean_l2, 4);
    const std::size_t w = std::max(label.size(), value.size()) + 2;
    label.resize(w, ' ');
    value.resize(w, ' ');
    header += label;
    values += value;
  }
  return "Cycle consistency (mean L2 after A -> B -> A, standardized coordinates)\n" +
         header + "\n" + values + "\n";
}

CycleTable cycle_table(const ExperimentConfig& cfg,
                       const std::map<DatasetKind, DomainModel>& models) {
  if (cfg.datasets.pairs.empty()) {
    throw ParameterError("cycle table needs at least one domain pair");
  }
  CycleTable table;
  for (const auto& [a, b] : cfg.datasets.pairs) {
    const auto ia = models.find(a);
    const auto ib = models.find(b);
    if (ia == models.end() || ib == models.end()) {
      throw MissingModelError("no model for " +
                              dataset_name(ia == models.end() ? a : b));
    }
    const PointCloud pts = domain_eval_data(a, cfg, cfg.datasets.eval_points);
    const TranslationReport r = cycle_check(ia->second, ib->second, pts, cfg.solve.steps);
    table.rows.push_back({a, b, r.mean_roundtrip_l2, pts.size(), cfg.solve.steps});
  }
  return table;
}

std::map<DatasetKind, DomainModel> load_domain_models(const ExperimentConfig& cfg,
                                                      bool train_missing,
                                                      const Logger& log) {
  if (cfg.datasets.pairs.empty()) {
    throw ParameterError("cycle table needs at least one domain pair");
  }
  std::map<DatasetKind, DomainModel> models;
  for (DatasetKind kind : cfg.domains()) {
    const auto path = model_path(cfg, kind);
    if (std::filesystem::exists(path)) {
      models.emplace(kind, load_model(path));
      continue;
    }
    if (!train_missing) {
      throw MissingModelError(
          "missing model " + path.string() + "; create it with: ddib gen --kind " +
          dataset_name(kind) + " --n " + std::to_string(cfg.training.points) +
          " --out " + dataset_name(kind) + ".csv && ddib train --domain " +
          dataset_name(kind) + " --data " + dataset_name(kind) + ".csv --out " +
          path.string() + "  (or rerun cycle-table with --train)");
    }
    if (log) log("training " + dataset_name(kind) + " -> " + path.string());
    DomainModel m = train_dataset_model(kind, cfg);
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    save_model(path, m);
    models.emplace(kind, std::move(m));
  }
  return models;
}

ColorMethod parse_color_method(std::string_view name) {
  if (name == "ddib") return ColorMethod::kDdib;
  if (name == "emd") return ColorMethod::kEmd;
  if (name == "sinkhorn") return ColorMethod::kSinkhorn;
  if (name == "linear") return ColorMethod::kLinear;
  throw ParameterError("unknown color transfer method '" + std::string(name) +
                       "' (expected ddib, emd, sinkhorn or linear)");
}

std::string color_method_name(ColorMethod m) {
  switch (m) {
    case ColorMethod::kDdib: return "ddib";
    case ColorMethod::kEmd: return "emd";
    case ColorMethod::kSinkhorn: return "sinkhorn";
    case ColorMethod::kLinear: return "linear";
  }
  return "?";
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("DDIB_CACHE_DIR"); env && *env) return env;
  return ".ddib-cache";
}

std::string image_model_key(const RgbImage& image, const ExperimentConfig& cfg) {
  ExperimentConfig relevant;
  relevant.schedule = cfg.schedule;
  relevant.network = cfg.network;
  relevant.training = cfg.training;
  std::uint64_t h = fnv1a(encode_ppm(image));
  h = fnv1a(serialize_config(relevant), h);
  return hex64(h);
}

DomainModel image_model(const RgbImage& image, const ColorTransferOptions& options,
                        const Logger& log) {
  const std::string key = image_model_key(image, options.config);
  const auto path = options.cache_dir / ("image-" + key + ".json");
  if (std::filesystem::exists(path)) {
    if (log) log("using cached color model " + path.string());
    return load_model(path);
  }
  if (!options.train_if_missing) {
    throw MissingModelError("no cached color model for this image (" + path.string() +
                            "); rerun with --train to fit one");
  }
  if (log) log("training color model " + key);
  DomainModel m = train_domain("image-" + key, pixels_to_cloud(image), options.config,
                               derive_seed(options.config.training.seed, key));
  std::filesystem::create_directories(options.cache_dir);
  save_model(path, m);
  return m;
}

RgbImage transfer_ddib(const DomainModel& subject_model,
                       const DomainModel& reference_model,
                       const RgbImage& subject, int n_steps) {
  const PointCloud colors = pixels_to_cloud(subject);
  const PointCloud mapped = translate(subject_model, reference_model, colors, n_steps);
  return cloud_to_pixels(mapped, subject.width, subject.height);
}

RgbImage transfer_ot(const RgbImage& reference, const RgbImage& subject,
                     ColorMethod method, const ColorTransferOptions& options) {
  const PointCloud ref = pixels_to_cloud(reference);
  const PointCloud subj = pixels_to_cloud(subject);
  PointCloud mapped;
  switch (method) {
    case ColorMethod::kEmd:
    case ColorMethod::kSinkhorn: {
      ColorConvertOptions cc;
      cc.sample_size = options.sample_size;
      cc.seed = options.seed;
      cc.method = method == ColorMethod::kEmd ? PlanMethod::kEmd : PlanMethod::kSinkhorn;
      cc.sinkhorn.epsilon = options.sinkhorn_epsilon;
      mapped = color_convert(ref, subj, cc).apply(subj);
      break;
    }
    case ColorMethod::kLinear: {
      const auto si = sample_indices(subj.size(), options.sample_size, options.seed);
      const auto ri = sample_indices(ref.size(), options.sample_size, options.seed);
      Eigen::MatrixXd sp(3, static_cast<Eigen::Index>(si.size()));
      Eigen::MatrixXd rp(3, static_cast<Eigen::Index>(ri.size()));
      for (std::size_t k = 0; k < si.size(); ++k) sp.col(static_cast<Eigen::Index>(k)) = subj.points.col(static_cast<Eigen::Index>(si[k]));
      for (std::size_t k = 0; k < ri.size(); ++k) rp.col(static_cast<Eigen::Index>(k)) = ref.points.col(static_cast<Eigen::Index>(ri[k]));
      SinkhornOptions so;
      so.epsilon = options.linear_epsilon;
      mapped = linear_map_estimate(PointCloud(sp), PointCloud(rp), so).apply(subj);
      break;
    }
    case ColorMethod::kDdib:
      throw ParameterError("transfer_ot does not handle the ddib method");
  }
  return cloud_to_pixels(mapped, subject.width, subject.height);
}

std::string ColorTransferResult::to_json() const {
  nlohmann::ordered_json j;
  j["metric"] = "pixel MSE in [-1,1] between the DDIB output and each OT baseline";
  nlohmann::ordered_json m;
  for (const auto& [method, value] : mse_vs_ddib) m[color_method_name(method)] = value;
  j["mse_vs_ddib"] = m;
  return j.dump(1) + "\n";
}

ColorTransferResult run_color_transfer(const RgbImage& reference,
                                       const RgbImage& subject,
                                       const ColorTransferOptions& options,
                                       const Logger& log) {
  ColorTransferResult result;
  const DomainModel subj_model = image_model(subject, options, log);
  const DomainModel ref_model = image_model(reference, options, log);
  const RgbImage ddib = transfer_ddib(subj_model, ref_model, subject, options.config.solve.steps);
  result.outputs.emplace(ColorMethod::kDdib, ddib);
  for (ColorMethod m : {ColorMethod::kEmd, ColorMethod::kSinkhorn, ColorMethod::kLinear}) {
    if (log) log("running " + color_method_name(m) + " baseline");
    RgbImage out = transfer_ot(reference, subject, m, options);
    result.mse_vs_ddib[m] = pixel_mse(ddib, out);
    result.outputs.emplace(m, std::move(out));
  }
  return result;
}

}  // namespace ddib
