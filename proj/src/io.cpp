#include "llp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace llp {

namespace fs = std::filesystem;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw Error(Errc::ParseError, where + ": not a number: '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text, const std::string& where) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(Errc::ParseError, where + ": not an integer: '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(Errc::ParseError, where + ": not a boolean: '" + text + "'");
}

LabeledDataset assemble(std::vector<std::vector<double>>& rows, std::vector<int>& labels, int min_classes) {
  if (rows.empty()) throw Error(Errc::EmptyDataset, "dataset has no rows");
  const auto dim = static_cast<Eigen::Index>(rows.front().size());
  FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), dim);
  int max_label = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != dim) {
      throw Error(Errc::DimensionMismatch, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                               " features, expected " + std::to_string(dim));
    }
    for (Eigen::Index d = 0; d < dim; ++d) x(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<std::size_t>(d)];
    if (labels[i] < 0) throw Error(Errc::LabelOutOfRange, "negative label on row " + std::to_string(i));
    max_label = std::max(max_label, labels[i]);
  }
  return LabeledDataset(std::move(x), std::move(labels), std::max(max_label + 1, min_classes));
}

}  // namespace

LabeledDataset read_dataset_csv(std::istream& in, int min_classes) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "CSV is empty (expected a header)");
  const auto header = split(trim(line), ',');
  if (header.size() < 2 || header.back() != "label") {
    throw Error(Errc::ParseError, "CSV header must be f0,...,f{D-1},label");
  }
  for (std::size_t d = 0; d + 1 < header.size(); ++d) {
    if (header[d] != "f" + std::to_string(d)) {
      throw Error(Errc::ParseError, "CSV header column " + std::to_string(d) + " should be f" + std::to_string(d));
    }
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw Error(Errc::ParseError, where + ": expected " + std::to_string(header.size()) + " fields");
    }
    std::vector<double> row(fields.size() - 1);
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = parse_double(fields[d], where);
    rows.push_back(std::move(row));
    labels.push_back(static_cast<int>(parse_integer(fields.back(), where)));
  }
  return assemble(rows, labels, min_classes);
}

LabeledDataset read_dataset_jsonl(std::istream& in, int min_classes) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      const auto obj = nlohmann::json::parse(line);
      rows.push_back(obj.at("features").get<std::vector<double>>());
      if (!obj.at("label").is_number_integer()) throw Error(Errc::ParseError, where + ": label must be an integer");
      labels.push_back(obj.at("label").get<int>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, where + ": " + e.what());
    }
  }
  return assemble(rows, labels, min_classes);
}

LabeledDataset load_dataset(const fs::path& path, int min_classes) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open dataset '" + path.string() + "'");
  const auto ext = path.extension().string();
  try {
    if (ext == ".jsonl" || ext == ".json") return read_dataset_jsonl(in, min_classes);
    return read_dataset_csv(in, min_classes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
  for (Eigen::Index d = 0; d < data.dim(); ++d) out << 'f' << d << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (Eigen::Index d = 0; d < data.dim(); ++d) {
      out << format_double(data.features()(static_cast<Eigen::Index>(i), d)) << ',';
    }
    out << data.labels()[i] << '\n';
  }
}

void write_dataset_jsonl(std::ostream& out, const LabeledDataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    nlohmann::ordered_json obj;
    std::vector<double> row(static_cast<std::size_t>(data.dim()));
    for (Eigen::Index d = 0; d < data.dim(); ++d) row[static_cast<std::size_t>(d)] = data.features()(static_cast<Eigen::Index>(i), d);
    obj["features"] = row;
    obj["label"] = data.labels()[i];
    out << obj.dump() << '\n';
  }
}

void save_dataset(const fs::path& path, const LabeledDataset& data) {
  std::ostringstream out;
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") {
    write_dataset_jsonl(out, data);
  } else {
    write_dataset_csv(out, data);
  }
  write_text_file(path, out.str());
}

nlohmann::ordered_json config_to_json(const TrainConfig& config) {
  nlohmann::ordered_json doc;
  doc["bag_size"] = config.bag_size;
  doc["epochs"] = config.epochs;
  doc["learning_rate"] = config.learning_rate;
  doc["alpha"] = config.alpha;
  doc["lambda"] = config.lambda;
  doc["optimizer"] = to_string(config.optimizer);
  doc["seed"] = config.seed.value;
  doc["loss"] = to_string(config.loss_kind);
  doc["arch"] = to_string(config.architecture);
  doc["hidden"] = config.hidden;
  doc["keep_partial"] = config.keep_partial;
  doc["clip_norm"] = config.effective_clip_norm();
  return doc;
}

TrainConfig config_from_json(const nlohmann::json& doc) {
  try {
    TrainConfig c;
    c.bag_size = doc.at("bag_size").get<std::size_t>();
    c.epochs = doc.at("epochs").get<std::size_t>();
    c.learning_rate = doc.at("learning_rate").get<double>();
    c.alpha = doc.at("alpha").get<double>();
    c.lambda = doc.at("lambda").get<double>();
    c.optimizer = parse_optimizer(doc.at("optimizer").get<std::string>());
    c.seed = RngSeed{doc.at("seed").get<std::uint64_t>()};
    c.loss_kind = parse_loss_kind(doc.at("loss").get<std::string>());
    c.architecture = parse_architecture(doc.at("arch").get<std::string>());
    c.hidden = doc.at("hidden").get<Eigen::Index>();
    c.keep_partial = doc.at("keep_partial").get<bool>();
    c.clip_norm = doc.at("clip_norm").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("config: ") + e.what());
  }
}

void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  const std::string where = "config key '" + key + "'";
  auto non_negative = [&](long long v) {
    if (v < 0) throw Error(Errc::InvalidConfig, where + " must be >= 0");
    return v;
  };
  try {
    if (key == "bag_size") {
      c.bag_size = static_cast<std::size_t>(non_negative(parse_integer(value, where)));
    } else if (key == "epochs") {
      c.epochs = static_cast<std::size_t>(non_negative(parse_integer(value, where)));
    } else if (key == "learning_rate" || key == "lr") {
      c.learning_rate = parse_double(value, where);
    } else if (key == "alpha") {
      c.alpha = parse_double(value, where);
    } else if (key == "lambda") {
      c.lambda = parse_double(value, where);
    } else if (key == "optimizer") {
      c.optimizer = parse_optimizer(value);
    } else if (key == "seed") {
      c.seed = RngSeed{static_cast<std::uint64_t>(non_negative(parse_integer(value, where)))};
    } else if (key == "loss") {
      c.loss_kind = parse_loss_kind(value);
    } else if (key == "arch") {
      c.architecture = parse_architecture(value);
    } else if (key == "hidden") {
      c.hidden = static_cast<Eigen::Index>(non_negative(parse_integer(value, where)));
    } else if (key == "keep_partial") {
      c.keep_partial = parse_bool(value, where);
    } else if (key == "clip_norm") {
      c.clip_norm = parse_double(value, where);
    } else {
      throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError) throw Error(Errc::InvalidConfig, e.what());
    throw;
  }
}

TrainConfig read_config(std::istream& in, TrainConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

TrainConfig load_config(const fs::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot open config file '" + path.string() + "'");
  return read_config(in, std::move(base));
}

namespace {

std::vector<double> row_major(const Matrix& m) { return std::vector<double>(m.data(), m.data() + m.size()); }
std::vector<double> as_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from(const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols, const char* name) {
  const auto values = arr.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw Error(Errc::DimensionMismatch, std::string("checkpoint field ") + name + " has the wrong length");
  }
  return Eigen::Map<const Matrix>(values.data(), rows, cols);
}

}  // namespace

nlohmann::ordered_json checkpoint_to_json(const Checkpoint& ck) {
  const auto& p = ck.params;
  nlohmann::ordered_json doc;
  doc["format"] = "llp-forge-checkpoint";
  doc["version"] = 1;
  doc["architecture"] = to_string(p.architecture);
  doc["input_dim"] = p.input_dim();
  doc["hidden_dim"] = p.architecture == Architecture::Mlp1 ? p.embedding_dim() : 0;
  doc["num_classes"] = p.num_classes();
  doc["w_hidden"] = row_major(p.w_hidden);
  doc["b_hidden"] = as_vector(p.b_hidden);
  doc["w_out"] = row_major(p.w_out);
  doc["b_out"] = as_vector(p.b_out);
  doc["config"] = config_to_json(ck.config);
  return doc;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "llp-forge-checkpoint") throw Error(Errc::ParseError, "not an llp-forge checkpoint");
    Checkpoint ck;
    auto& p = ck.params;
    p.architecture = parse_architecture(doc.at("architecture").get<std::string>());
    const auto d = doc.at("input_dim").get<Eigen::Index>();
    const auto h = doc.at("hidden_dim").get<Eigen::Index>();
    const auto c = doc.at("num_classes").get<Eigen::Index>();
    const Eigen::Index body = p.architecture == Architecture::Mlp1 ? h : d;
    if (p.architecture == Architecture::Mlp1) {
      p.w_hidden = matrix_from(doc.at("w_hidden"), h, d, "w_hidden");
      p.b_hidden = matrix_from(doc.at("b_hidden"), h, 1, "b_hidden");
    }
    p.w_out = matrix_from(doc.at("w_out"), c, body, "w_out");
    p.b_out = matrix_from(doc.at("b_out"), c, 1, "b_out");
    p.validate();
    ck.config = config_from_json(doc.at("config"));
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const fs::path& path, const Checkpoint& checkpoint) {
  write_text_file(path, checkpoint_to_json(checkpoint).dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open checkpoint '" + path.string() + "'");
  try {
    return checkpoint_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

void write_history_csv(std::ostream& out, const TrainHistory& history, bool include_timing) {
  out << "epoch,train_loss,val_loss,seconds\n";
  for (std::size_t e = 0; e < history.epochs(); ++e) {
    out << e << ',' << format_double(history.train_loss[e]) << ',';
    if (e < history.val_loss.size() && !std::isnan(history.val_loss[e])) out << format_double(history.val_loss[e]);
    out << ',';
    if (include_timing && e < history.seconds.size()) out << format_double(history.seconds[e]);
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "value,seed,w_p,w_r,w_f1\n";
  for (const auto& r : rows) {
    out << format_double(r.value) << ',' << r.seed << ',' << format_double(r.scores.precision) << ','
        << format_double(r.scores.recall) << ',' << format_double(r.scores.f1) << '\n';
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
}

}  // namespace llp
