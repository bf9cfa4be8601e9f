#include "ddib/config.hpp"

#include <charconv>
#include <sstream>

#include "ddib/csv.hpp"
#include "ddib/error.hpp"

namespace ddib {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ParseError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void set_value(ExperimentConfig& cfg, const std::string& section,
               const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "schedule") {
    if (key == "steps") return void(cfg.schedule.steps = parse_number<int>(full, value));
    if (key == "beta_min") return void(cfg.schedule.beta_min = parse_number<double>(full, value));
    if (key == "beta_max") return void(cfg.schedule.beta_max = parse_number<double>(full, value));
  } else if (section == "network") {
    if (key == "hidden") {
      cfg.network.hidden.clear();
      for (const auto& item : split_list(value)) {
        cfg.network.hidden.push_back(parse_number<int>(full, item));
      }
      return;
    }
    if (key == "time_embed") return void(cfg.network.time_embed = parse_number<int>(full, value));
  } else if (section == "training") {
    auto& t = cfg.training;
    if (key == "batch_size") return void(t.batch_size = parse_number<int>(full, value));
    if (key == "iterations") return void(t.iterations = parse_number<long>(full, value));
    if (key == "learning_rate") return void(t.learning_rate = parse_number<double>(full, value));
    if (key == "adam_beta1") return void(t.adam_beta1 = parse_number<double>(full, value));
    if (key == "adam_beta2") return void(t.adam_beta2 = parse_number<double>(full, value));
    if (key == "adam_eps") return void(t.adam_eps = parse_number<double>(full, value));
    if (key == "ema_decay") return void(t.ema_decay = parse_number<double>(full, value));
    if (key == "seed") return void(t.seed = parse_number<std::uint64_t>(full, value));
    if (key == "points") return void(t.points = parse_number<std::size_t>(full, value));
  } else if (section == "solve") {
    if (key == "steps") return void(cfg.solve.steps = parse_number<int>(full, value));
  } else if (section == "datasets") {
    auto& d = cfg.datasets;
    if (key == "pairs") {
      d.pairs.clear();
      for (const auto& item : split_list(value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          throw ParseError("config key '" + full + "': pair '" + item + "' needs the form A:B");
        }
        try {
          d.pairs.emplace_back(parse_dataset_kind(trim(item.substr(0, colon))),
                               parse_dataset_kind(trim(item.substr(colon + 1))));
        } catch (const ParameterError& e) {
          throw ParseError("config key '" + full + "': " + e.what());
        }
      }
      return;
    }
    if (key == "eval_points") return void(d.eval_points = parse_number<std::size_t>(full, value));
    if (key == "seed") return void(d.seed = parse_number<std::uint64_t>(full, value));
  } else if (section == "output") {
    if (key == "dir") return void(cfg.output.dir = value);
    if (key == "models") return void(cfg.output.models = value);
  } else {
    throw ParseError("unknown config section [" + section + "]");
  }
  throw ParseError("unknown config key '" + full + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schedule.steps < 2) throw ParameterError("schedule.steps must be at least 2");
  if (!(schedule.beta_min > 0.0 && schedule.beta_min <= schedule.beta_max &&
        schedule.beta_max < 1.0)) {
    throw ParameterError("schedule needs 0 < beta_min <= beta_max < 1");
  }
  network_shape(2).validate();
  train_config(training.seed).validate();
  if (training.points < 2) throw ParameterError("training.points must be at least 2");
  // The upper bound (schedule.steps - 1) is enforced by the solver, so a
  // short schedule can still be used for training alone.
  if (solve.steps < 1) throw ParameterError("solve.steps must be positive");
  if (datasets.eval_points < 1) throw ParameterError("datasets.eval_points must be positive");
}

NoiseSchedule ExperimentConfig::make_schedule() const {
  return NoiseSchedule::linear(schedule.steps, schedule.beta_min, schedule.beta_max);
}

NetworkShape ExperimentConfig::network_shape(int input_dim) const {
  return NetworkShape{input_dim, network.time_embed, network.hidden};
}

TrainConfig ExperimentConfig::train_config(std::uint64_t seed) const {
  TrainConfig tc;
  tc.batch_size = training.batch_size;
  tc.iterations = training.iterations;
  tc.learning_rate = training.learning_rate;
  tc.adam_beta1 = training.adam_beta1;
  tc.adam_beta2 = training.adam_beta2;
  tc.adam_eps = training.adam_eps;
  tc.ema_decay = training.ema_decay;
  tc.seed = seed;
  return tc;
}

std::vector<DatasetKind> ExperimentConfig::domains() const {
  std::vector<DatasetKind> out;
  auto add = [&out](DatasetKind k) {
    for (auto existing : out) {
      if (existing == k) return;
    }
    out.push_back(k);
  };
  for (const auto& [a, b] : datasets.pairs) {
    add(a);
    add(b);
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError("malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        static const char* kSections[] = {"schedule", "network", "training",
                                          "solve", "datasets", "output"};
        bool known = false;
        for (const char* s : kSections) known = known || section == s;
        if (!known) throw ParseError("unknown config section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("expected key = value");
      if (section.empty()) throw ParseError("key outside of any section");
      set_value(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[schedule]\n"
      << "steps = " << cfg.schedule.steps << "\n"
      << "beta_min = " << format_real(cfg.schedule.beta_min) << "\n"
      << "beta_max = " << format_real(cfg.schedule.beta_max) << "\n\n";
  out << "[network]\nhidden = ";
  for (std::size_t i = 0; i < cfg.network.hidden.size(); ++i) {
    out << (i ? ", " : "") << cfg.network.hidden[i];
  }
  out << "\ntime_embed = " << cfg.network.time_embed << "\n\n";
  const auto& t = cfg.training;
  out << "[training]\n"
      << "batch_size = " << t.batch_size << "\n"
      << "iterations = " << t.iterations << "\n"
      << "learning_rate = " << format_real(t.learning_rate) << "\n"
      << "adam_beta1 = " << format_real(t.adam_beta1) << "\n"
      << "adam_beta2 = " << format_real(t.adam_beta2) << "\n"
      << "adam_eps = " << format_real(t.adam_eps) << "\n"
      << "ema_decay = " << format_real(t.ema_decay) << "\n"
      << "seed = " << t.seed << "\n"
      << "points = " << t.points << "\n\n";
  out << "[solve]\nsteps = " << cfg.solve.steps << "\n\n";
  out << "[datasets]\npairs = ";
  for (std::size_t i = 0; i < cfg.datasets.pairs.size(); ++i) {
    out << (i ? ", " : "") << dataset_code(cfg.datasets.pairs[i].first) << ":"
        << dataset_code(cfg.datasets.pairs[i].second);
  }
  out << "\neval_points = " << cfg.datasets.eval_points << "\n"
      << "seed = " << cfg.datasets.seed << "\n\n";
  out << "[output]\ndir = " << cfg.output.dir << "\nmodels = " << cfg.output.models << "\n";
  return out.str();
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ParseError("override '" + assignment + "' must look like section.key=value");
  }
  set_value(cfg, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
            trim(assignment.substr(eq + 1)));
}

}  // namespace ddib
