#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "csv.hpp"
#include "earnvol/errors.hpp"
#include "earnvol/evalharness.hpp"

namespace earnvol {

namespace {

struct Value;
using Array = std::vector<Value>;
struct Value {
  std::variant<bool, long long, double, std::string, Array> v;
};

struct Entry {
  Value value;
  std::size_t line = 0;
};

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::Config, "config line " + std::to_string(line) + ": " + msg);
}

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  Value parse_all() {
    Value v = parse();
    skip_ws();
    if (pos_ != s_.size()) fail(line_, "trailing characters after value");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  Value parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail(line_, "missing value");
    const char c = s_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    auto end = s_.find_first_of(",] \t", pos_);
    if (end == std::string_view::npos) end = s_.size();
    const auto tok = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (tok == "true") return {true};
    if (tok == "false") return {false};
    if (tok.find_first_of(".eE") == std::string_view::npos || tok == "inf") {
      long long i = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), i);
      if (ec == std::errc{} && ptr == tok.data() + tok.size()) return {i};
    }
    if (auto d = csv::parse_double(tok)) return {*d};
    fail(line_, "cannot parse value '" + std::string(tok) + "'");
  }

  Value parse_string() {
    std::string out;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) fail(line_, "unterminated string");
    ++pos_;
    return {out};
  }

  Value parse_array() {
    Array items;
    ++pos_;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return {items};
    }
    while (true) {
      items.push_back(parse());
      skip_ws();
      if (pos_ >= s_.size()) fail(line_, "unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return {items};
      }
      if (s_[pos_] != ',') fail(line_, "expected ',' in array");
      ++pos_;
    }
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::map<std::string, Entry> parse_document(const std::string& text) {
  std::map<std::string, Entry> doc;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line(csv::trim(strip_comment(raw)));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(csv::trim(std::string_view(line).substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key(csv::trim(std::string_view(line).substr(0, eq)));
    if (key.empty()) fail(line_no, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    Value v = ValueParser(std::string_view(line).substr(eq + 1), line_no).parse_all();
    if (!doc.emplace(full, Entry{std::move(v), line_no}).second) fail(line_no, "duplicate key '" + full + "'");
  }
  return doc;
}

class Reader {
 public:
  Reader(std::map<std::string, Entry> doc, std::filesystem::path base) : doc_(std::move(doc)), base_(std::move(base)) {}

  const Entry* get(const std::string& key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &it->second;
  }

  std::optional<std::string> str(const std::string& key) {
    const auto* e = get(key);
    if (!e) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&e->value.v)) return *s;
    fail(e->line, key + " must be a string");
  }

  std::optional<std::filesystem::path> path(const std::string& key) {
    auto s = str(key);
    if (!s) return std::nullopt;
    std::filesystem::path p(*s);
    return p.is_absolute() || base_.empty() ? p : base_ / p;
  }

  std::optional<long long> integer(const std::string& key) {
    const auto* e = get(key);
    if (!e) return std::nullopt;
    if (const auto* i = std::get_if<long long>(&e->value.v)) return *i;
    fail(e->line, key + " must be an integer");
  }

  std::optional<double> number(const std::string& key) {
    const auto* e = get(key);
    if (!e) return std::nullopt;
    if (const auto* i = std::get_if<long long>(&e->value.v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&e->value.v)) return *d;
    fail(e->line, key + " must be a number");
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* e = get(key);
    if (!e) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&e->value.v)) return *b;
    fail(e->line, key + " must be true or false");
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const auto* e = get(key);
    if (!e) return std::nullopt;
    const auto* a = std::get_if<Array>(&e->value.v);
    if (!a) fail(e->line, key + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : *a) {
      const auto* s = std::get_if<std::string>(&item.v);
      if (!s) fail(e->line, key + " must be an array of strings");
      out.push_back(*s);
    }
    return out;
  }

  std::optional<std::vector<int>> ints(const std::string& key) {
    const auto* e = get(key);
    if (!e) return std::nullopt;
    const auto* a = std::get_if<Array>(&e->value.v);
    if (!a) fail(e->line, key + " must be an array of integers");
    std::vector<int> out;
    for (const auto& item : *a) {
      const auto* i = std::get_if<long long>(&item.v);
      if (!i) fail(e->line, key + " must be an array of integers");
      out.push_back(static_cast<int>(*i));
    }
    return out;
  }

  std::size_t line_of(const std::string& key) const {
    auto it = doc_.find(key);
    return it == doc_.end() ? 0 : it->second.line;
  }

  void reject_unknown() const {
    for (const auto& [k, e] : doc_)
      if (!seen_.contains(k)) fail(e.line, "unknown key '" + k + "'");
  }

 private:
  std::map<std::string, Entry> doc_;
  std::filesystem::path base_;
  std::set<std::string> seen_;
};

template <class T>
T positive(std::optional<long long> v, T fallback, const char* key, std::size_t line) {
  if (!v) return fallback;
  if (*v <= 0) fail(line, std::string(key) + " must be positive");
  return static_cast<T>(*v);
}

}  // namespace

bool is_known_model(const std::string& name) {
  return parse_model_spec(name).has_value() || name == "Random(Ticker)" || name == "Random(All)" ||
         name == "Embedding";
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir) {
  Reader r(parse_document(text), base_dir);
  ExperimentConfig c;

  auto earnings = r.path("earnings");
  auto prices = r.path("prices_dir");
  if (!earnings || !prices) throw Error(ErrorKind::Config, "config needs 'earnings' and 'prices_dir'");
  c.earnings = *earnings;
  c.prices_dir = *prices;
  if (auto s = r.str("convention")) {
    try {
      c.convention = parse_convention(*s);
    } catch (const Error& e) {
      fail(r.line_of("convention"), e.what());
    }
  }
  if (auto t = r.ints("taus")) {
    if (t->empty()) fail(r.line_of("taus"), "taus must not be empty");
    for (int tau : *t)
      if (tau < 2) fail(r.line_of("taus"), "every tau must be >= 2");
    c.taus = *t;
  }
  if (auto m = r.strings("models")) c.models = *m;
  if (c.models.empty()) throw Error(ErrorKind::Config, "config needs a non-empty 'models' list");
  for (const auto& m : c.models)
    if (!is_known_model(m)) fail(r.line_of("models"), "unknown model '" + m + "'");

  try {
    if (auto q = r.strings("quarters"))
      for (const auto& s : *q) c.quarters.push_back(Quarter::parse(s));
    if (auto range = r.str("quarter_range")) {
      auto colon = range->find(':');
      if (colon == std::string::npos) fail(r.line_of("quarter_range"), "expected FIRST:LAST, e.g. 2021Q1:2023Q4");
      const Quarter first = Quarter::parse(range->substr(0, colon)), last = Quarter::parse(range->substr(colon + 1));
      if (last < first) fail(r.line_of("quarter_range"), "quarter range is reversed");
      for (Quarter q = first; q <= last; q = q.next()) c.quarters.push_back(q);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, e.what());
  }
  if (c.quarters.empty()) throw Error(ErrorKind::Config, "config needs 'quarters' or 'quarter_range'");

  if (auto s = r.integer("seed")) c.split_seed = static_cast<std::uint64_t>(*s);
  c.ratio.train = positive<int>(r.integer("train_ratio"), c.ratio.train, "train_ratio", r.line_of("train_ratio"));
  if (auto v = r.integer("val_ratio")) {
    if (*v < 0) fail(r.line_of("val_ratio"), "val_ratio must be >= 0");
    c.ratio.val = static_cast<int>(*v);
  }
  c.threads = positive<unsigned>(r.integer("threads"), c.threads, "threads", r.line_of("threads"));

  c.augment_earnings = r.path("augment.earnings");
  c.augment_prices_dir = r.path("augment.prices_dir");
  if (c.augment_earnings.has_value() != c.augment_prices_dir.has_value())
    throw Error(ErrorKind::Config, "[augment] needs both 'earnings' and 'prices_dir'");
  if (auto y = r.integer("augment.years")) c.augment_years = static_cast<int>(*y);

  if (auto v = r.number("mlp.learning_rate")) c.mlp.learning_rate = *v;
  c.mlp.batch_size = positive<std::size_t>(r.integer("mlp.batch_size"), c.mlp.batch_size, "batch_size", r.line_of("mlp.batch_size"));
  if (auto v = r.integer("mlp.max_epochs")) c.mlp.max_epochs = static_cast<std::size_t>(*v);
  if (auto v = r.integer("mlp.seed")) c.mlp.seed = static_cast<std::uint64_t>(*v);
  c.mlp.patience = positive<std::size_t>(r.integer("mlp.patience"), c.mlp.patience, "patience", r.line_of("mlp.patience"));
  c.mlp.hidden = positive<std::size_t>(r.integer("mlp.hidden"), c.mlp.hidden, "hidden", r.line_of("mlp.hidden"));
  if (auto a = r.str("mlp.activation")) {
    if (*a == "relu") c.mlp.activation = Activation::Relu;
    else if (*a == "tanh") c.mlp.activation = Activation::Tanh;
    else fail(r.line_of("mlp.activation"), "activation must be relu or tanh");
  }

  c.embeddings_file = r.path("embeddings.file");
  c.random_dim = positive<std::size_t>(r.integer("embeddings.dim"), c.random_dim, "dim", r.line_of("embeddings.dim"));
  if (auto v = r.integer("embeddings.seed")) c.embedding_seed = static_cast<std::uint64_t>(*v);
  if (auto v = r.number("embeddings.ridge")) {
    if (*v < 0) fail(r.line_of("embeddings.ridge"), "ridge must be >= 0");
    c.embedding_ridge = *v;
  }
  for (const auto& m : c.models)
    if (m == "Embedding" && !c.embeddings_file)
      throw Error(ErrorKind::Config, "model 'Embedding' needs [embeddings] file");

  if (auto v = r.boolean("analysis.drift")) c.drift = *v;
  if (auto v = r.integer("analysis.drift_horizon")) c.drift_horizon = static_cast<int>(*v);
  if (auto v = r.integer("analysis.drift_tau")) c.drift_tau = static_cast<int>(*v);
  if (auto v = r.boolean("analysis.similarity")) c.similarity = *v;
  if (auto v = r.boolean("analysis.similarity_exclude_same_ticker")) c.similarity_exclude_same_ticker = *v;
  if (auto v = r.boolean("analysis.correlation")) c.correlation = *v;
  if (auto v = r.str("analysis.correlation_reference")) c.correlation_reference = *v;
  if (c.correlation && !is_known_model(c.correlation_reference))
    fail(r.line_of("analysis.correlation_reference"), "unknown model '" + c.correlation_reference + "'");

  r.reject_unknown();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path.parent_path());
}

}  // namespace earnvol
