#include "mgcast/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mgcast {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    std::size_t line = 1;
};

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

ConfigValue parse_scalar(const std::string& raw, std::size_t line_no) {
    const std::string s = trim(raw);
    if (s.empty()) fail(line_no, "missing value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') fail(line_no, "unterminated string");
        return ConfigValue{s.substr(1, s.size() - 2)};
    }
    if (s == "true") return ConfigValue{true};
    if (s == "false") return ConfigValue{false};
    // integer first, then float
    {
        std::int64_t iv;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
        if (ec == std::errc{} && p == s.data() + s.size()) return ConfigValue{iv};
    }
    {
        double dv;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), dv);
        if (ec == std::errc{} && p == s.data() + s.size() && std::isfinite(dv))
            return ConfigValue{dv};
    }
    fail(line_no, "cannot parse value '" + s + "'");
}

ConfigValue parse_value(const std::string& raw, std::size_t line_no) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') fail(line_no, "unterminated array (arrays must be single-line)");
        std::vector<ConfigValue> items;
        std::string inner = s.substr(1, s.size() - 2);
        std::string cur;
        bool in_string = false;
        for (char ch : inner) {
            if (ch == '"') in_string = !in_string;
            if (ch == ',' && !in_string) {
                if (!trim(cur).empty()) items.push_back(parse_scalar(cur, line_no));
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        if (!trim(cur).empty()) items.push_back(parse_scalar(cur, line_no));
        return ConfigValue{std::move(items)};
    }
    return parse_scalar(s, line_no);
}

}  // namespace

std::map<std::string, ConfigValue> parse_config_text(const std::string& text) {
    std::map<std::string, ConfigValue> kv;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line_no, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) fail(line_no, "empty section name");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) fail(line_no, "empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (kv.count(full)) fail(line_no, "duplicate key '" + full + "'");
        kv.emplace(full, parse_value(s.substr(eq + 1), line_no));
    }
    return kv;
}

std::map<std::string, ConfigValue> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

class KvReader {
  public:
    explicit KvReader(const std::map<std::string, ConfigValue>& kv) : kv_(kv) {}

    std::optional<std::string> get_string(const std::string& key) {
        const ConfigValue* v = take(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) throw ConfigError("config field '" + key + "' must be a string");
        return std::get<std::string>(v->v);
    }
    std::optional<bool> get_bool(const std::string& key) {
        const ConfigValue* v = take(key);
        if (!v) return std::nullopt;
        if (!v->is_bool()) throw ConfigError("config field '" + key + "' must be true/false");
        return std::get<bool>(v->v);
    }
    std::optional<std::int64_t> get_int(const std::string& key) {
        const ConfigValue* v = take(key);
        if (!v) return std::nullopt;
        if (!v->is_int()) throw ConfigError("config field '" + key + "' must be an integer");
        return std::get<std::int64_t>(v->v);
    }
    std::optional<double> get_float(const std::string& key) {
        const ConfigValue* v = take(key);
        if (!v) return std::nullopt;
        if (v->is_int()) return static_cast<double>(std::get<std::int64_t>(v->v));
        if (!v->is_float()) throw ConfigError("config field '" + key + "' must be a number");
        return std::get<double>(v->v);
    }
    std::optional<std::vector<std::int64_t>> get_int_array(const std::string& key) {
        const ConfigValue* v = take(key);
        if (!v) return std::nullopt;
        std::vector<std::int64_t> out;
        if (v->is_int()) {
            out.push_back(std::get<std::int64_t>(v->v));
            return out;
        }
        if (!v->is_array())
            throw ConfigError("config field '" + key + "' must be an integer or array");
        for (const ConfigValue& item : std::get<std::vector<ConfigValue>>(v->v)) {
            if (!item.is_int())
                throw ConfigError("config field '" + key + "' must contain integers");
            out.push_back(std::get<std::int64_t>(item.v));
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : kv_)
            if (!used_.count(key)) throw ConfigError("unknown config field '" + key + "'");
    }

  private:
    const ConfigValue* take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }
    const std::map<std::string, ConfigValue>& kv_;
    std::set<std::string> used_;
};

std::size_t to_count(std::int64_t v, const std::string& field) {
    if (v < 0) throw ConfigError("config field '" + field + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

}  // namespace

void RunConfig::validate() const {
    model.validate();
    train.validate();
    split.validate();
    if (dataset.kind != "csv" && dataset.kind != "synthetic-two-tone")
        throw ConfigError("dataset.kind must be 'csv' or 'synthetic-two-tone', got '" +
                          dataset.kind + "'");
    if (dataset.kind == "csv" && dataset.path.empty())
        throw ConfigError("dataset.path is required for csv datasets");
    if (!dataset.preset.empty() && !dataset_preset(dataset.preset))
        throw ConfigError("unknown dataset preset '" + dataset.preset + "'");
}

RunConfig run_config_from_map(const std::map<std::string, ConfigValue>& kv) {
    KvReader r(kv);
    RunConfig run;

    if (auto v = r.get_string("dataset.kind")) run.dataset.kind = *v;
    if (auto v = r.get_string("dataset.preset")) run.dataset.preset = *v;
    if (auto v = r.get_string("dataset.path")) run.dataset.path = *v;
    if (auto v = r.get_bool("dataset.date_column")) run.dataset.date_column = *v;
    if (auto v = r.get_int("dataset.len")) run.dataset.synthetic_len = to_count(*v, "dataset.len");
    if (run.dataset.preset == "synthetic-two-tone") run.dataset.kind = "synthetic-two-tone";

    // split defaults come from the preset when one is named
    if (!run.dataset.preset.empty()) {
        if (auto p = dataset_preset(run.dataset.preset)) run.split = p->split;
    }
    if (auto v = r.get_float("split.train")) run.split.train_frac = *v;
    if (auto v = r.get_float("split.val")) run.split.val_frac = *v;
    if (auto v = r.get_float("split.test")) run.split.test_frac = *v;

    if (auto v = r.get_string("model.variant")) run.model.variant = variant_from_string(*v);
    if (auto v = r.get_int("model.input_len"))
        run.model.input_len = to_count(*v, "model.input_len");
    if (auto v = r.get_int("model.output_len"))
        run.model.output_len = to_count(*v, "model.output_len");
    if (auto v = r.get_int("model.grids")) run.model.grids = to_count(*v, "model.grids");
    if (run.model.variant == Variant::Residual && !kv.count("model.grids")) run.model.grids = 1;
    if (auto v = r.get_int_array("model.smoothing_iters")) {
        run.model.smoothing_iters.clear();
        for (std::int64_t x : *v)
            run.model.smoothing_iters.push_back(to_count(x, "model.smoothing_iters"));
        // a single value is replicated across all grids
        if (run.model.smoothing_iters.size() == 1 && run.model.grids > 1)
            run.model.smoothing_iters.assign(run.model.grids, run.model.smoothing_iters[0]);
    } else {
        run.model.smoothing_iters.assign(run.model.grids, 1);
    }
    if (auto v = r.get_string("model.op_a")) run.model.op_a = op_choice_from_string(*v);
    if (auto v = r.get_string("model.op_b")) run.model.op_b = op_choice_from_string(*v);
    if (auto v = r.get_int("model.conv_kernel"))
        run.model.conv_kernel = to_count(*v, "model.conv_kernel");
    if (auto v = r.get_bool("model.double_activation")) run.model.double_activation = *v;

    if (auto v = r.get_int("train.batch_size"))
        run.train.batch_size = to_count(*v, "train.batch_size");
    if (auto v = r.get_float("train.learning_rate")) run.train.learning_rate = *v;
    if (auto v = r.get_float("train.beta1")) run.train.beta1 = *v;
    if (auto v = r.get_float("train.beta2")) run.train.beta2 = *v;
    if (auto v = r.get_float("train.epsilon")) run.train.eps_opt = *v;
    if (auto v = r.get_int("train.max_epochs"))
        run.train.max_epochs = to_count(*v, "train.max_epochs");
    if (auto v = r.get_int("train.patience")) run.train.patience = to_count(*v, "train.patience");
    if (auto v = r.get_int("train.seed")) run.train.seed = static_cast<std::uint64_t>(*v);
    if (auto v = r.get_float("train.clip_norm")) run.train.clip_norm = *v;

    if (auto v = r.get_string("output.dir")) run.out_dir = *v;

    r.reject_unknown();
    run.validate();
    return run;
}

RunConfig run_config_from_file(const std::string& path) {
    return run_config_from_map(parse_config_file(path));
}

namespace {

nlohmann::json run_to_json(const RunConfig& run) {
    nlohmann::json j;
    j["dataset"] = {{"kind", run.dataset.kind},
                    {"preset", run.dataset.preset},
                    {"path", run.dataset.path},
                    {"date_column", run.dataset.date_column},
                    {"synthetic_len", run.dataset.synthetic_len}};
    j["model"] = {{"variant", to_string(run.model.variant)},
                  {"input_len", run.model.input_len},
                  {"output_len", run.model.output_len},
                  {"grids", run.model.grids},
                  {"smoothing_iters", run.model.smoothing_iters},
                  {"op_a", to_string(run.model.op_a)},
                  {"op_b", to_string(run.model.op_b)},
                  {"conv_kernel", run.model.conv_kernel},
                  {"double_activation", run.model.double_activation}};
    j["train"] = {{"batch_size", run.train.batch_size},
                  {"learning_rate", run.train.learning_rate},
                  {"beta1", run.train.beta1},
                  {"beta2", run.train.beta2},
                  {"epsilon", run.train.eps_opt},
                  {"max_epochs", run.train.max_epochs},
                  {"patience", run.train.patience},
                  {"seed", run.train.seed},
                  {"clip_norm", run.train.clip_norm}};
    j["split"] = {{"train", run.split.train_frac},
                  {"val", run.split.val_frac},
                  {"test", run.split.test_frac}};
    return j;
}

}  // namespace

std::string canonical_config_json(const RunConfig& run) {
    // nlohmann::json objects are std::map-backed: keys serialize sorted
    return run_to_json(run).dump();
}

RunConfig run_config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid stored config JSON: ") + e.what());
    }
    RunConfig run;
    try {
        const auto& d = j.at("dataset");
        run.dataset.kind = d.at("kind").get<std::string>();
        run.dataset.preset = d.at("preset").get<std::string>();
        run.dataset.path = d.at("path").get<std::string>();
        run.dataset.date_column = d.at("date_column").get<bool>();
        run.dataset.synthetic_len = d.at("synthetic_len").get<std::size_t>();
        const auto& m = j.at("model");
        run.model.variant = variant_from_string(m.at("variant").get<std::string>());
        run.model.input_len = m.at("input_len").get<std::size_t>();
        run.model.output_len = m.at("output_len").get<std::size_t>();
        run.model.grids = m.at("grids").get<std::size_t>();
        run.model.smoothing_iters = m.at("smoothing_iters").get<std::vector<std::size_t>>();
        run.model.op_a = op_choice_from_string(m.at("op_a").get<std::string>());
        run.model.op_b = op_choice_from_string(m.at("op_b").get<std::string>());
        run.model.conv_kernel = m.at("conv_kernel").get<std::size_t>();
        run.model.double_activation = m.at("double_activation").get<bool>();
        const auto& t = j.at("train");
        run.train.batch_size = t.at("batch_size").get<std::size_t>();
        run.train.learning_rate = t.at("learning_rate").get<double>();
        run.train.beta1 = t.at("beta1").get<double>();
        run.train.beta2 = t.at("beta2").get<double>();
        run.train.eps_opt = t.at("epsilon").get<double>();
        run.train.max_epochs = t.at("max_epochs").get<std::size_t>();
        run.train.patience = t.at("patience").get<std::size_t>();
        run.train.seed = t.at("seed").get<std::uint64_t>();
        run.train.clip_norm = t.at("clip_norm").get<double>();
        const auto& s = j.at("split");
        run.split.train_frac = s.at("train").get<double>();
        run.split.val_frac = s.at("val").get<double>();
        run.split.test_frac = s.at("test").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("stored config JSON is missing fields: ") + e.what());
    }
    run.validate();
    return run;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t config_hash(const RunConfig& run) { return fnv1a64(canonical_config_json(run)); }

std::string config_hash_hex(const RunConfig& run) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(run)));
    return std::string(buf);
}

}  // namespace mgcast
