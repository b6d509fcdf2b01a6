#include "amc/run_config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "../common/binary.hpp"

namespace amc {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
    N out{};
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("config: bad value '" + value + "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean '" + value + "' for " + key + " (use true/false)");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(key, trim(item)));
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

std::string format_list(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Field {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define AMC_SIZE_FIELD(KEY, MEMBER)                                                              \
    Field { KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_number<std::size_t>(KEY, v); }, \
            [](const RunConfig& c) { return std::to_string(c.MEMBER); } }
#define AMC_DOUBLE_FIELD(KEY, MEMBER)                                                         \
    Field { KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_number<double>(KEY, v); }, \
            [](const RunConfig& c) { return format_double(c.MEMBER); } }
#define AMC_LIST_FIELD(KEY, MEMBER)                                                     \
    Field { KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_list(KEY, v); }, \
            [](const RunConfig& c) { return format_list(c.MEMBER); } }
#define AMC_BOOL_FIELD(KEY, MEMBER)                                                     \
    Field { KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_bool(KEY, v); }, \
            [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); } }
#define AMC_STRING_FIELD(KEY, MEMBER) \
    Field { KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = v; }, [](const RunConfig& c) { return c.MEMBER; } }

const std::vector<Field>& fields() {
    static const std::vector<Field> all = {
        AMC_SIZE_FIELD("model.seq_len", model.seq_len),
        AMC_LIST_FIELD("model.mlp_dims", model.mlp_dims),
        AMC_SIZE_FIELD("model.msm_filters_per_kernel", model.msm_filters_per_kernel),
        AMC_LIST_FIELD("model.msm_kernel_lengths", model.msm_kernel_lengths),
        AMC_LIST_FIELD("model.backbone_channels", model.backbone_channels),
        AMC_SIZE_FIELD("model.heads", model.heads),
        AMC_LIST_FIELD("model.classifier_hidden", model.classifier_hidden),
        AMC_BOOL_FIELD("model.use_acm", model.use_acm),
        AMC_BOOL_FIELD("model.use_msm", model.use_msm),
        AMC_BOOL_FIELD("model.use_ffm", model.use_ffm),
        AMC_DOUBLE_FIELD("train.learning_rate", train.learning_rate),
        AMC_SIZE_FIELD("train.batch_size", train.batch_size),
        AMC_SIZE_FIELD("train.patience", train.patience),
        AMC_SIZE_FIELD("train.max_epochs", train.max_epochs),
        Field{"train.seed", [](RunConfig& c, const std::string& v) { c.train.seed = parse_number<std::uint64_t>("train.seed", v); },
              [](const RunConfig& c) { return std::to_string(c.train.seed); }},
        AMC_DOUBLE_FIELD("train.beta1", train.beta1),
        AMC_DOUBLE_FIELD("train.beta2", train.beta2),
        AMC_DOUBLE_FIELD("train.epsilon", train.epsilon),
        AMC_DOUBLE_FIELD("train.improvement_tolerance", train.improvement_tolerance),
        AMC_DOUBLE_FIELD("channel.max_cfo", max_cfo),
        AMC_DOUBLE_FIELD("channel.max_sro_ppm", max_sro_ppm),
        AMC_STRING_FIELD("paths.data", data_path),
        AMC_STRING_FIELD("paths.model", model_path),
        AMC_STRING_FIELD("paths.history", history_path),
        AMC_STRING_FIELD("paths.report_dir", report_dir),
    };
    return all;
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        bool known = false;
        for (const auto& f : fields())
            if (f.key == key) {
                f.set(config, value);
                known = true;
                break;
            }
        if (!known) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return config;
}

std::string serialize_run_config(const RunConfig& config) {
    std::string out;
    for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
    return out;
}

RunConfig load_run_config(const std::string& path) {
    try {
        return parse_run_config(detail::read_file(path));
    } catch (const FormatError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

}  // namespace amc
