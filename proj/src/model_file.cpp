#include "ddib/model_file.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddib/error.hpp"
#include "json.hpp"

namespace ddib {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string serialize_model(const DomainModel& model) {
  const NetworkShape& shape = model.net.shape();
  ordered_json j;
  j["format"] = "ddib-model";
  j["schema_version"] = kModelSchemaVersion;
  j["name"] = model.name;
  j["input_dim"] = shape.input_dim;
  j["hidden_dims"] = shape.hidden_dims;
  j["time_embed_dim"] = shape.time_embed_dim;
  j["activation"] = "silu";
  j["schedule"] = {
      {"family", "linear"},
      {"steps", model.schedule.steps()},
      {"beta_min", model.schedule.beta_min()},
      {"beta_max", model.schedule.beta_max()},
      {"fingerprint", hex64(model.schedule.fingerprint())},
  };
  j["training_seed"] = model.training_seed;
  j["standardizer"] = {
      {"mean", to_vector(model.standardizer.mean)},
      {"scale", to_vector(model.standardizer.scale)},
  };
  j["weights"] = model.net.weights();
  return j.dump(1) + "\n";
}

DomainModel parse_model(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "ddib-model") {
      throw FormatError("not a ddib model file");
    }
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw FormatError("unsupported model schema version " + std::to_string(version));
    }
    if (j.value("activation", "silu") != "silu") {
      throw FormatError("unsupported activation " + j["activation"].dump());
    }
    NetworkShape shape;
    shape.input_dim = j.at("input_dim").get<int>();
    shape.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
    shape.time_embed_dim = j.at("time_embed_dim").get<int>();
    const auto& js = j.at("schedule");
    if (js.value("family", "linear") != "linear") {
      throw FormatError("unsupported schedule family");
    }
    NoiseSchedule schedule = NoiseSchedule::linear(js.at("steps").get<int>(),
                                                   js.at("beta_min").get<double>(),
                                                   js.at("beta_max").get<double>());
    if (js.contains("fingerprint") &&
        js["fingerprint"].get<std::string>() != hex64(schedule.fingerprint())) {
      throw FormatError("schedule fingerprint does not match its parameters");
    }
    Standardizer st{to_eigen(j.at("standardizer").at("mean").get<std::vector<double>>()),
                    to_eigen(j.at("standardizer").at("scale").get<std::vector<double>>())};
    if (st.mean.size() != shape.input_dim || st.scale.size() != shape.input_dim) {
      throw FormatError("standardizer dimension does not match input_dim");
    }
    ScoreNetwork net(shape, j.at("weights").get<std::vector<double>>());
    return DomainModel{j.value("name", ""), std::move(schedule), std::move(net),
                       std::move(st), j.at("training_seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const DomainModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model file " + path.string());
  out << serialize_model(model);
}

DomainModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingModelError("model file " + path.string() + " not found");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

void check_compatible(const DomainModel& a, const DomainModel& b) {
  if (a.net.dim() != b.net.dim()) {
    throw CompatibilityError("models '" + a.name + "' and '" + b.name +
                             "' have different point dimensions");
  }
  if (a.schedule.fingerprint() != b.schedule.fingerprint() ||
      !(a.schedule == b.schedule)) {
    throw CompatibilityError("models '" + a.name + "' and '" + b.name +
                             "' were trained under different noise schedules");
  }
}

}  // namespace ddib
