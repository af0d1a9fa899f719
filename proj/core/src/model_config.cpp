#include "epps/model_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "epps/errors.hpp"

namespace epps {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError("config key '" + key + "': '" + text + "' is not a number");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& source) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError(source + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw DataError(source + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second) {
            throw DataError(source + ":" + std::to_string(lineno) + ": repeated key '" + key + "'");
        }
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file " + path.string());
    return parse_key_values(in, path.string());
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : to_double(key, it->second);
}

long long get_int(const KeyValues& kv, const std::string& key, long long fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    long long v = 0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError("config key '" + key + "': '" + s + "' is not an integer");
    }
    return v;
}

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

bool get_bool(const KeyValues& kv, const std::string& key, bool fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw DataError("config key '" + key + "': '" + it->second + "' is not a boolean");
}

std::vector<double> get_double_list(const KeyValues& kv, const std::string& key, const std::vector<double>& fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) out.push_back(to_double(key, item));
    return out;
}

std::vector<std::string> get_string_list(const KeyValues& kv, const std::string& key,
                                         const std::vector<std::string>& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : split_list(it->second);
}

CorrelationModel model_from_keys(const KeyValues& kv, const std::string& prefix, const CorrelationModel& fallback) {
    const bool any = kv.count(prefix + ".a") || kv.count(prefix + ".b") || kv.count(prefix + ".c") ||
                     kv.count(prefix + ".xi") || kv.count(prefix + ".tau");
    if (!any) return fallback;
    if (kv.count(prefix + ".c") && (kv.count(prefix + ".a") || kv.count(prefix + ".b"))) {
        throw DataError("model keys: " + prefix + ".c cannot be combined with " + prefix + ".a/.b");
    }
    CorrelationModel m;
    m.width = get_double(kv, prefix + ".xi", 0.0);
    m.lag = get_double(kv, prefix + ".tau", 0.0);
    if (kv.count(prefix + ".c")) {
        const double c = get_double(kv, prefix + ".c", 0.0);
        (m.width > 0.0 ? m.exp_weight : m.delta_weight) = c;
    } else {
        m.delta_weight = get_double(kv, prefix + ".a", 0.0);
        m.exp_weight = get_double(kv, prefix + ".b", 0.0);
    }
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError("model keys " + prefix + ": " + e.what());
    }
    return m;
}

ModelPair pair_from_keys(const KeyValues& kv) {
    const auto cross = model_from_keys(kv, "cross", CorrelationModel{});
    const auto ai = model_from_keys(kv, "auto_i", CorrelationModel::brownian(1.0));
    const auto aj = model_from_keys(kv, "auto_j", CorrelationModel::brownian(1.0));
    try {
        return ModelPair(cross, ai, aj);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model pair: ") + e.what());
    }
}

std::string to_text(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

KeyValues pair_to_keys(const ModelPair& pair) {
    KeyValues kv;
    auto put = [&](const std::string& prefix, const CorrelationModel& m) {
        kv[prefix + ".a"] = format_double(m.delta_weight);
        kv[prefix + ".b"] = format_double(m.exp_weight);
        kv[prefix + ".xi"] = format_double(m.width);
        kv[prefix + ".tau"] = format_double(m.lag);
    };
    put("cross", pair.cross());
    put("auto_i", pair.auto_i());
    put("auto_j", pair.auto_j());
    return kv;
}

}  // namespace epps
