#include "ddib/bridge.hpp"

#include "ddib/error.hpp"
#include "ddib/odesolve.hpp"
#include "json.hpp"

namespace ddib {

namespace {

void check_pair(const NoisePredictor& a, const NoisePredictor& b,
                const PointCloud& points) {
  if (a.dim() != b.dim()) {
    throw CompatibilityError("source and target models have different dimensions");
  }
  if (points.dim() != a.dim()) {
    throw ShapeError("points are " + std::to_string(points.dim()) +
                     "-dimensional but the models are " + std::to_string(a.dim()) +
                     "-dimensional");
  }
  if (points.tags.size() != points.size()) {
    throw ShapeError("point cloud tag count does not match point count");
  }
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), m.col(j).data() + m.rows()};
}

}  // namespace

std::vector<double> TranslationReport::roundtrip_l2() const {
  std::vector<double> out;
  if (!reconstructed) return out;
  out.reserve(size());
  for (Eigen::Index j = 0; j < source.cols(); ++j) {
    out.push_back((source.col(j) - reconstructed->col(j)).norm());
  }
  return out;
}

std::string TranslationReport::to_json() const {
  nlohmann::ordered_json j;
  j["source_model"] = source_model;
  j["target_model"] = target_model;
  j["n_steps"] = n_steps;
  j["count"] = size();
  if (reconstructed) j["mean_roundtrip_l2"] = mean_roundtrip_l2;
  const std::vector<double> l2 = roundtrip_l2();
  auto records = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    nlohmann::ordered_json r;
    r["tag"] = tags[i];
    r["source"] = column(source, c);
    r["latent"] = column(latent, c);
    r["target"] = column(target, c);
    if (reverse_latent) r["reverse_latent"] = column(*reverse_latent, c);
    if (reconstructed) {
      r["reconstructed"] = column(*reconstructed, c);
      r["roundtrip_l2"] = l2[i];
    }
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j.dump(1) + "\n";
}

TranslationReport translate_with_report(const NoisePredictor& src,
                                        const NoisePredictor& tgt,
                                        const NoiseSchedule& s,
                                        const PointCloud& points, int n_steps) {
  check_pair(src, tgt, points);
  TranslationReport report;
  report.tags = points.tags;
  report.n_steps = n_steps;
  report.source = points.points;
  report.latent = encode(src, s, points.points, n_steps);
  report.target = decode(tgt, s, report.latent, n_steps);
  return report;
}

PointCloud translate(const NoisePredictor& src, const NoisePredictor& tgt,
                     const NoiseSchedule& s, const PointCloud& points,
                     int n_steps) {
  TranslationReport r = translate_with_report(src, tgt, s, points, n_steps);
  return PointCloud(std::move(r.target), std::move(r.tags));
}

TranslationReport cycle_check(const NoisePredictor& net_a,
                              const NoisePredictor& net_b,
                              const NoiseSchedule& s, const PointCloud& points,
                              int n_steps) {
  TranslationReport report = translate_with_report(net_a, net_b, s, points, n_steps);
  report.reverse_latent = encode(net_b, s, report.target, n_steps);
  report.reconstructed = decode(net_a, s, *report.reverse_latent, n_steps);
  const std::vector<double> l2 = report.roundtrip_l2();
  double sum = 0.0;
  for (double d : l2) sum += d;
  report.mean_roundtrip_l2 = l2.empty() ? 0.0 : sum / static_cast<double>(l2.size());
  return report;
}

TranslationReport translate_with_report(const DomainModel& src,
                                        const DomainModel& tgt,
                                        const PointCloud& raw_points,
                                        int n_steps) {
  check_compatible(src, tgt);
  TranslationReport r = translate_with_report(
      src.net, tgt.net, src.schedule, src.standardizer.apply(raw_points), n_steps);
  r.source = raw_points.points;
  r.target = tgt.standardizer.invert(r.target);
  r.source_model = src.name;
  r.target_model = tgt.name;
  return r;
}

PointCloud translate(const DomainModel& src, const DomainModel& tgt,
                     const PointCloud& raw_points, int n_steps) {
  TranslationReport r = translate_with_report(src, tgt, raw_points, n_steps);
  return PointCloud(std::move(r.target), std::move(r.tags));
}

TranslationReport cycle_check(const DomainModel& a, const DomainModel& b,
                              const PointCloud& raw_points, int n_steps) {
  check_compatible(a, b);
  TranslationReport r = cycle_check(a.net, b.net, a.schedule,
                                    a.standardizer.apply(raw_points), n_steps);
  r.source_model = a.name;
  r.target_model = b.name;
  return r;
}

}  // namespace ddib
