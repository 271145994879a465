#include <phychal/config.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace phychal {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

config config::parse_string(const std::string& text, const std::string& origin) {
    config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']' || stripped.size() < 3)
                throw config_error(origin + ": malformed section header", line_no);
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section.empty())
                throw config_error(origin + ": empty section name", line_no);
            cfg.sections_[section]; // register even if empty
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ": expected key=value", line_no);
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw config_error(origin + ": empty key", line_no);
        if (section.empty())
            throw config_error(origin + ": key outside any [section]", line_no);
        auto& sec = cfg.sections_[section];
        if (sec.count(key) != 0)
            throw config_error(origin + ": duplicate key '" + key + "'", line_no);
        sec[key] = entry{value, line_no};
    }
    return cfg;
}

config config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

const config::entry* config::find(const std::string& section,
                                  const std::string& key) const {
    auto sec = sections_.find(section);
    if (sec == sections_.end()) return nullptr;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return nullptr;
    return &it->second;
}

bool config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

void config::bad_value(const std::string& section, const std::string& key,
                       const entry& e, const std::string& expected) const {
    throw config_error(origin_ + ": [" + section + "] " + key + " = '" + e.value +
                           "' is not " + expected,
                       e.line);
}

std::int64_t config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
    const entry* e = find(section, key);
    if (e == nullptr) return fallback;
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(e->value, &used);
        if (used != e->value.size()) bad_value(section, key, *e, "an integer");
        return v;
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        bad_value(section, key, *e, "an integer");
    }
}

std::uint64_t config::get_uint(const std::string& section, const std::string& key,
                               std::uint64_t fallback) const {
    const entry* e = find(section, key);
    if (e == nullptr) return fallback;
    if (!e->value.empty() && e->value[0] == '-')
        bad_value(section, key, *e, "a nonnegative integer");
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(e->value, &used);
        if (used != e->value.size())
            bad_value(section, key, *e, "a nonnegative integer");
        return v;
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        bad_value(section, key, *e, "a nonnegative integer");
    }
}

double config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    const entry* e = find(section, key);
    if (e == nullptr) return fallback;
    const std::string low = lower(e->value);
    if (low == "inf" || low == "+inf" || low == "infinity")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(e->value, &used);
        if (used != e->value.size()) bad_value(section, key, *e, "a number");
        return v;
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        bad_value(section, key, *e, "a number");
    }
}

bool config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
    const entry* e = find(section, key);
    if (e == nullptr) return fallback;
    const std::string low = lower(e->value);
    if (low == "true" || low == "1" || low == "yes") return true;
    if (low == "false" || low == "0" || low == "no") return false;
    bad_value(section, key, *e, "a boolean");
}

std::string config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    const entry* e = find(section, key);
    return e == nullptr ? fallback : e->value;
}

std::vector<double> config::get_double_list(const std::string& section,
                                            const std::string& key,
                                            const std::vector<double>& fallback) const {
    const entry* e = find(section, key);
    if (e == nullptr) return fallback;
    std::vector<double> out;
    const auto parse_one = [&](const std::string& token) {
        const std::string t = trim(token);
        if (t.empty()) bad_value(section, key, *e, "a number list");
        const std::string low = lower(t);
        if (low == "inf" || low == "+inf" || low == "infinity")
            return std::numeric_limits<double>::infinity();
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            bad_value(section, key, *e, "a number list");
        }
        if (used != t.size()) bad_value(section, key, *e, "a number list");
        return v;
    };
    if (e->value.find(':') != std::string::npos) {
        // start:stop:step inclusive grid
        std::vector<std::string> parts;
        std::string token;
        std::istringstream in(e->value);
        while (std::getline(in, token, ':')) parts.push_back(token);
        if (parts.size() != 3)
            bad_value(section, key, *e, "a start:stop:step grid");
        const double start = parse_one(parts[0]);
        const double stop = parse_one(parts[1]);
        const double step = parse_one(parts[2]);
        if (!(step > 0.0) || stop < start)
            bad_value(section, key, *e, "a start:stop:step grid with step > 0");
        for (double v = start; v <= stop + 1e-9 * step; v += step)
            out.push_back(v);
        return out;
    }
    std::string token;
    std::istringstream in(e->value);
    while (std::getline(in, token, ',')) out.push_back(parse_one(token));
    if (out.empty()) bad_value(section, key, *e, "a number list");
    return out;
}

void config::visit(const std::function<void(const std::string&, const std::string&,
                                            int)>& fn) const {
    for (const auto& [section, entries] : sections_)
        for (const auto& [key, e] : entries) fn(section, key, e.line);
}

void validate_schema(const config& cfg) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"ofdm", {"fft_size", "guard_length", "bandwidth_hz"}},
        {"plan", {"delta_l"}},
        {"channel", {"delay_rms", "path_count"}},
        {"scenario",
         {"snr_db", "beta", "modulation_order", "slots", "trials"}},
        {"impairments",
         {"carrier_offset_max", "sample_offset_max", "clock_offset",
          "search_grid_size", "search_ramp_max"}},
        {"experiment",
         {"delta_l_grid", "realizations", "beta_grid", "modulation_orders",
          "snr_grid_db", "pf_grid", "grid_sizes"}},
    };
    cfg.visit([&](const std::string& section, const std::string& key, int line) {
        auto it = schema.find(section);
        if (it == schema.end())
            throw config_error("unknown section [" + section + "]", line);
        if (it->second.count(key) == 0)
            throw config_error("unknown key '" + key + "' in [" + section + "]",
                               line);
    });
}

} // namespace phychal
