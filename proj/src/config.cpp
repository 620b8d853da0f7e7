#include "qrate/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "builtin_configs.hpp"
#include "json.hpp"

namespace qrate {

namespace {

using json = nlohmann::json;

std::string compose(const std::string& source, int line, const std::string& field, const std::string& message) {
    std::string out = source;
    if (line > 0) {
        out += ":" + std::to_string(line);
    }
    if (!field.empty()) {
        out += ": " + field;
    }
    return out + ": " + message;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "name",
        "plant.A", "plant.B", "plant.D", "plant.K", "plant.tau_s", "plant.N",
        "design.E0", "design.eps", "design.delta", "design.psi", "design.rho", "design.phi", "design.Q",
        "design.eps_lambda",
        "sim.x0", "sim.horizon", "sim.substeps", "sim.decimation", "sim.synthesize_if_invalid",
        "disturbance.kind", "disturbance.level", "disturbance.pulses", "disturbance.amplitude",
        "disturbance.frequency_hz", "disturbance.phase", "disturbance.bound", "disturbance.seed",
        "disturbance.hold",
        "output.dir",
    };
    return keys;
}

// Parameters each disturbance kind accepts.
const std::map<std::string, std::set<std::string>>& kind_keys() {
    static const std::map<std::string, std::set<std::string>> m{
        {"zero", {}},
        {"constant", {"disturbance.level"}},
        {"pulse_train", {"disturbance.pulses"}},
        {"sinusoid", {"disturbance.amplitude", "disturbance.frequency_hz", "disturbance.phase"}},
        {"seeded_uniform", {"disturbance.bound", "disturbance.seed", "disturbance.hold"}},
    };
    return m;
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    json value;
    int line = 0;
};

class Reader {
public:
    Reader(std::map<std::string, Entry> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source)) {}

    [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) != 0; }

    [[nodiscard]] int line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        throw ConfigError(source_, line_of(key), key, message);
    }

    const json& at(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            throw ConfigError(source_, 0, key, "required field is missing");
        }
        return it->second.value;
    }

    double number(const std::string& key) const { return number_of(key, at(key)); }

    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_number_integer()) {
            fail(key, "expected an integer");
        }
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_number_unsigned()) {
            fail(key, "expected a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_boolean()) {
            fail(key, "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_string()) {
            fail(key, "expected a string");
        }
        return v.get<std::string>();
    }

    Vector vector(const std::string& key) const { return vector_of(key, at(key)); }

    Matrix matrix(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
            fail(key, "expected a non-empty matrix such as [[1, 0], [0, 1]]");
        }
        const std::size_t rows = v.size();
        const std::size_t cols = v[0].size();
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            if (!v[i].is_array() || v[i].size() != cols) {
                fail(key, "row " + std::to_string(i + 1) + " has the wrong length");
            }
            for (std::size_t j = 0; j < cols; ++j) {
                m(i, j) = number_of(key, v[i][j]);
            }
        }
        return m;
    }

    Vector vector_of(const std::string& key, const json& v) const {
        if (v.is_number()) {
            return {number_of(key, v)};
        }
        if (!v.is_array() || v.empty()) {
            fail(key, "expected a non-empty list of numbers");
        }
        Vector out;
        for (const json& e : v) {
            out.push_back(number_of(key, e));
        }
        return out;
    }

    double number_of(const std::string& key, const json& v) const {
        if (!v.is_number()) {
            fail(key, "expected a number, got " + v.dump());
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            fail(key, "value must be finite");
        }
        return x;
    }

private:
    std::map<std::string, Entry> entries_;
    std::string source_;
};

std::map<std::string, Entry> tokenize(std::string_view text, const std::string& source) {
    static const std::regex key_re("[A-Za-z_][A-Za-z0-9_]*(\\.[A-Za-z_][A-Za-z0-9_]*)*");
    static const std::regex bare_re("[A-Za-z_][A-Za-z0-9_./:-]*");
    std::map<std::string, Entry> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source, line_no, "", "expected `key = value`");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!std::regex_match(key, key_re)) {
            throw ConfigError(source, line_no, key, "malformed key");
        }
        if (known_keys().count(key) == 0) {
            throw ConfigError(source, line_no, key, "unknown field");
        }
        if (out.count(key) != 0) {
            throw ConfigError(source, line_no, key,
                              "duplicate field (first set on line " + std::to_string(out[key].line) + ")");
        }
        if (value.empty()) {
            throw ConfigError(source, line_no, key, "missing value");
        }
        Entry e;
        e.line = line_no;
        try {
            e.value = json::parse(value);
        } catch (const json::parse_error&) {
            if (!std::regex_match(value, bare_re)) {
                throw ConfigError(source, line_no, key, "cannot parse value `" + value + "`");
            }
            e.value = value;
        }
        out.emplace(key, std::move(e));
    }
    return out;
}

DisturbanceSignal read_disturbance(const Reader& r, std::size_t channels) {
    const std::string kind = r.string("disturbance.kind", "zero");
    const auto it = kind_keys().find(kind);
    if (it == kind_keys().end()) {
        r.fail("disturbance.kind", "unknown kind `" + kind +
                                       "` (expected zero, constant, pulse_train, sinusoid or seeded_uniform)");
    }
    for (const std::string& key : known_keys()) {
        if (key.rfind("disturbance.", 0) == 0 && key != "disturbance.kind" && r.has(key) &&
            it->second.count(key) == 0) {
            r.fail(key, "not used by disturbance kind `" + kind + "`");
        }
    }
    auto check_channels = [&](const std::string& key, const Vector& v) {
        if (v.size() != channels) {
            r.fail(key, "expected " + std::to_string(channels) + " channel value(s), one per column of plant.D");
        }
    };
    try {
        if (kind == "zero") {
            return DisturbanceSignal::zero(channels);
        }
        if (kind == "constant") {
            const Vector level = r.vector("disturbance.level");
            check_channels("disturbance.level", level);
            return {channels, ConstantSignal{level}};
        }
        if (kind == "pulse_train") {
            PulseTrainSignal p;
            const json& v = r.at("disturbance.pulses");
            if (!v.is_array()) {
                r.fail("disturbance.pulses", "expected a list of [start, end, level] triples");
            }
            for (const json& e : v) {
                if (!e.is_array() || e.size() != 3) {
                    r.fail("disturbance.pulses", "each pulse must be [start, end, level]");
                }
                Pulse pulse{r.number_of("disturbance.pulses", e[0]), r.number_of("disturbance.pulses", e[1]),
                            r.vector_of("disturbance.pulses", e[2])};
                check_channels("disturbance.pulses", pulse.level);
                p.pulses.push_back(std::move(pulse));
            }
            return {channels, std::move(p)};
        }
        if (kind == "sinusoid") {
            SinusoidSignal s{r.vector("disturbance.amplitude"), r.number("disturbance.frequency_hz"),
                             r.number("disturbance.phase", 0.0)};
            check_channels("disturbance.amplitude", s.amplitude);
            return {channels, std::move(s)};
        }
        SeededUniformSignal s{r.number("disturbance.bound"), r.unsigned_integer("disturbance.seed", 0),
                              r.number("disturbance.hold")};
        return {channels, s};
    } catch (const std::invalid_argument& e) {
        r.fail("disturbance.kind", e.what());
    }
}

// Maps "plant.N must ..." style messages back to the field's line.
[[noreturn]] void rethrow_validation(const Reader& r, const std::string& source, const std::string& msg) {
    const std::string field = msg.substr(0, msg.find(' '));
    if (known_keys().count(field) != 0) {
        throw ConfigError(source, r.line_of(field), field, msg.substr(field.size() + 1));
    }
    throw ConfigError(source, 0, "", msg);
}

std::string matrix_text(const Matrix& m) {
    std::string s = "[";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        s += i ? ", [" : "[";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            s += (j ? ", " : "") + format_number(m(i, j));
        }
        s += "]";
    }
    return s + "]";
}

std::string vector_text(const Vector& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + format_number(v[i]);
    }
    return s + "]";
}

}  // namespace

ConfigError::ConfigError(std::string source, int line, std::string field, const std::string& message)
    : std::runtime_error(compose(source, line, field, message)), line_(line), field_(std::move(field)) {}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ScenarioConfig::validate() const {
    plant.validate();
    design.validate(plant.nx());
    if (x0.size() != plant.nx()) {
        throw std::invalid_argument("sim.x0 must have n_x = " + std::to_string(plant.nx()) + " entries");
    }
    if (!std::all_of(x0.begin(), x0.end(), [](double v) { return std::isfinite(v); })) {
        throw std::invalid_argument("sim.x0 must be finite");
    }
    if (!(horizon >= plant.tau_s) || !std::isfinite(horizon)) {
        throw std::invalid_argument("sim.horizon must be finite and at least plant.tau_s");
    }
    if (substeps < 1) {
        throw std::invalid_argument("sim.substeps must be at least 1");
    }
    if (decimation < 1) {
        throw std::invalid_argument("sim.decimation must be at least 1");
    }
    if (disturbance.channels() != plant.nd()) {
        throw std::invalid_argument("disturbance.kind must have one channel per column of plant.D");
    }
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    const auto& p = a.plant;
    const auto& q = b.plant;
    const auto& d = a.design;
    const auto& e = b.design;
    return a.name == b.name && p.A == q.A && p.B == q.B && p.D == q.D && p.K == q.K && p.tau_s == q.tau_s &&
           p.N == q.N && d.E0 == e.E0 && d.eps == e.eps && d.delta == e.delta && d.psi == e.psi && d.rho == e.rho &&
           d.phi == e.phi && d.Q == e.Q && d.eps_lambda == e.eps_lambda && a.x0 == b.x0 && a.horizon == b.horizon &&
           a.disturbance == b.disturbance && a.substeps == b.substeps && a.decimation == b.decimation &&
           a.output_dir == b.output_dir && a.synthesize_if_invalid == b.synthesize_if_invalid;
}

ScenarioConfig parse_config(std::string_view text, const std::string& source) {
    const Reader r(tokenize(text, source), source);
    ScenarioConfig c;
    c.name = r.string("name", c.name);

    c.plant.A = r.matrix("plant.A");
    c.plant.B = r.matrix("plant.B");
    c.plant.D = r.matrix("plant.D");
    c.plant.K = r.matrix("plant.K");
    c.plant.tau_s = r.number("plant.tau_s");
    const std::int64_t N = r.integer("plant.N", -1);
    if (!r.has("plant.N")) {
        r.fail("plant.N", "required field is missing");
    }
    if (N < 2 || N > 1'000'000) {
        r.fail("plant.N", "must be an integer >= 2");
    }
    c.plant.N = static_cast<int>(N);

    DesignParams& p = c.design;
    p.E0 = r.number("design.E0", p.E0);
    p.eps = r.number("design.eps", p.eps);
    p.delta = r.number("design.delta", p.delta);
    p.psi = r.number("design.psi", p.psi);
    p.rho = r.number("design.rho", p.rho);
    p.phi = r.number("design.phi", p.phi);
    p.eps_lambda = r.number("design.eps_lambda", p.eps_lambda);
    if (r.has("design.Q")) {
        p.Q = r.matrix("design.Q");
    }

    c.x0 = r.vector("sim.x0");
    c.horizon = r.number("sim.horizon");
    const std::int64_t substeps = r.integer("sim.substeps", c.substeps);
    const std::int64_t decimation = r.integer("sim.decimation", c.decimation);
    if (substeps < 1 || substeps > 1'000'000) {
        r.fail("sim.substeps", "must be between 1 and 1000000");
    }
    if (decimation < 1 || decimation > 1'000'000) {
        r.fail("sim.decimation", "must be between 1 and 1000000");
    }
    c.substeps = static_cast<int>(substeps);
    c.decimation = static_cast<int>(decimation);
    c.synthesize_if_invalid = r.boolean("sim.synthesize_if_invalid", false);
    c.output_dir = r.string("output.dir", "");

    try {
        c.plant.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_validation(r, source, e.what());
    }
    c.disturbance = read_disturbance(r, c.plant.nd());
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_validation(r, source, e.what());
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    constexpr std::string_view prefix = "builtin:";
    if (path.rfind(prefix, 0) == 0) {
        const std::string name = path.substr(prefix.size());
        return parse_config(builtin_text(name), path);
    }
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, 0, "", "cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string serialize_config(const ScenarioConfig& c) {
    std::ostringstream os;
    os << "name = " << json(c.name).dump() << "\n\n";
    os << "plant.A = " << matrix_text(c.plant.A) << "\n";
    os << "plant.B = " << matrix_text(c.plant.B) << "\n";
    os << "plant.D = " << matrix_text(c.plant.D) << "\n";
    os << "plant.K = " << matrix_text(c.plant.K) << "\n";
    os << "plant.tau_s = " << format_number(c.plant.tau_s) << "\n";
    os << "plant.N = " << c.plant.N << "\n\n";

    const DesignParams& p = c.design;
    os << "design.E0 = " << format_number(p.E0) << "\n";
    os << "design.eps = " << format_number(p.eps) << "\n";
    os << "design.delta = " << format_number(p.delta) << "\n";
    os << "design.psi = " << format_number(p.psi) << "\n";
    os << "design.rho = " << format_number(p.rho) << "\n";
    os << "design.phi = " << format_number(p.phi) << "\n";
    os << "design.eps_lambda = " << format_number(p.eps_lambda) << "\n";
    if (!p.Q.empty()) {
        os << "design.Q = " << matrix_text(p.Q) << "\n";
    }
    os << "\n";

    os << "sim.x0 = " << vector_text(c.x0) << "\n";
    os << "sim.horizon = " << format_number(c.horizon) << "\n";
    os << "sim.substeps = " << c.substeps << "\n";
    os << "sim.decimation = " << c.decimation << "\n";
    os << "sim.synthesize_if_invalid = " << (c.synthesize_if_invalid ? "true" : "false") << "\n\n";

    const auto& kind = c.disturbance.kind();
    os << "disturbance.kind = " << c.disturbance.kind_name() << "\n";
    if (const auto* k = std::get_if<ConstantSignal>(&kind)) {
        os << "disturbance.level = " << vector_text(k->level) << "\n";
    } else if (const auto* k = std::get_if<PulseTrainSignal>(&kind)) {
        os << "disturbance.pulses = [";
        for (std::size_t i = 0; i < k->pulses.size(); ++i) {
            const Pulse& pl = k->pulses[i];
            os << (i ? ", " : "") << "[" << format_number(pl.start) << ", " << format_number(pl.end) << ", "
               << vector_text(pl.level) << "]";
        }
        os << "]\n";
    } else if (const auto* k = std::get_if<SinusoidSignal>(&kind)) {
        os << "disturbance.amplitude = " << vector_text(k->amplitude) << "\n";
        os << "disturbance.frequency_hz = " << format_number(k->frequency_hz) << "\n";
        os << "disturbance.phase = " << format_number(k->phase) << "\n";
    } else if (const auto* k = std::get_if<SeededUniformSignal>(&kind)) {
        os << "disturbance.bound = " << format_number(k->bound) << "\n";
        os << "disturbance.seed = " << k->seed << "\n";
        os << "disturbance.hold = " << format_number(k->hold) << "\n";
    }
    if (!c.output_dir.empty()) {
        os << "\noutput.dir = " << json(c.output_dir).dump() << "\n";
    }
    return os.str();
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : detail::kBuiltinConfigs) {
        out.emplace_back(name);
    }
    return out;
}

std::string builtin_text(std::string_view name) {
    for (const auto& [n, text] : detail::kBuiltinConfigs) {
        if (n == name) {
            return std::string(text);
        }
    }
    std::string known;
    for (const auto& [n, text] : detail::kBuiltinConfigs) {
        known += (known.empty() ? "" : ", ") + std::string(n);
    }
    throw ConfigError("builtin:" + std::string(name), 0, "", "no such bundled scenario (known: " + known + ")");
}

}  // namespace qrate
