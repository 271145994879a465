#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace phychal {

// Error in a configuration file; carries the 1-based line number when the
// problem is tied to a specific line (0 otherwise).
class config_error : public std::runtime_error {
public:
    config_error(const std::string& message, int line = 0)
        : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")"
                                      : message),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Line-oriented key=value configuration with [section] headers, '#' or ';'
// comments, and a strict schema: unknown sections or keys are errors. Values
// are validated on typed access.
class config {
public:
    static config parse_file(const std::string& path);
    static config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;

    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
    // Accepts "inf" (case-insensitive) for unbounded parameters.
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    // Comma-separated list, or "start:stop:step" for an inclusive grid.
    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const;

    // Enumerate every (section, key, line) entry, e.g. for schema validation.
    void visit(const std::function<void(const std::string& section, const std::string& key,
                                        int line)>& fn) const;

private:
    struct entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, entry>> sections_;
    std::string origin_;

    const entry* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void bad_value(const std::string& section, const std::string& key,
                                const entry& e, const std::string& expected) const;
};

// The schema accepted by the experiment runner; parse errors and unknown
// keys are reported through config_error.
void validate_schema(const config& cfg);

} // namespace phychal
