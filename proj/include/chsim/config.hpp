#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chsim/errors.hpp"
#include "chsim/grid.hpp"
#include "chsim/init.hpp"
#include "chsim/models.hpp"

namespace chsim {

// ---------------------------------------------------------------------------
// Arithmetic expressions in config values
// ---------------------------------------------------------------------------
//
// Numeric config entries may be strings like "4*eps^2" or "2*h". Supported:
// + - * / ^ (right-associative), unary minus, parentheses, and the variables
// pi, h (coarsest grid spacing) and eps (once the interface width is known).

namespace expr {

class Parser {
public:
    Parser(std::string_view text, const std::map<std::string, double>& vars)
        : s_(text), vars_(vars) {}

    double run() {
        const double v = expression();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing characters");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression '" + std::string(s_) + "': " + msg);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double expression() {
        double v = term();
        for (;;) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }

    double term() {
        double v = factor();
        for (;;) {
            if (eat('*')) v *= factor();
            else if (eat('/')) v /= factor();
            else return v;
        }
    }

    double factor() {
        const double base = unary();
        if (eat('^')) return std::pow(base, factor());
        return base;
    }

    double unary() {
        if (eat('-')) return -unary();
        return primary();
    }

    double primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (eat('(')) {
            const double v = expression();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.data() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("invalid number");
            pos_ += static_cast<std::size_t>(end - begin);
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                        s_[pos_] == '_'))
                ++pos_;
            const std::string name(s_.substr(start, pos_ - start));
            auto it = vars_.find(name);
            if (it == vars_.end()) fail("unknown variable '" + name + "'");
            return it->second;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view s_;
    const std::map<std::string, double>& vars_;
    std::size_t pos_ = 0;
};

inline double evaluate(std::string_view text, const std::map<std::string, double>& vars) {
    return Parser(text, vars).run();
}

} // namespace expr

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct Schedule {
    long steps = 0;
    long diag_stride = 1;
    long snapshot_stride = 1;
};

struct OutputOptions {
    std::string dir = "out";
    bool csv = true;
    bool raw = true;
    bool pgm = true;
    std::vector<int> slice_axes; // 3D image slices, one mid-plane per axis
};

struct RunConfig {
    GridSpec grid;
    ModelParams params;
    Shape init;
    Schedule schedule;
    OutputOptions output;
};

namespace detail {

/// Pointer into a JSON document carrying its key path for error messages.
class Cursor {
public:
    Cursor(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const nlohmann::json& raw() const { return *j_; }
    const std::string& path() const { return path_; }

    bool has(const char* key) const { return j_->contains(key); }

    Cursor child(const char* key) const {
        if (!j_->contains(key)) throw ConfigError("config: missing required key '" + join(key) + "'");
        return Cursor((*j_)[key], join(key));
    }

    /// Unknown keys are errors so typos in scientific parameters cannot pass
    /// silently.
    void allow_only(std::initializer_list<const char*> keys) const {
        if (!j_->is_object())
            throw ConfigError("config: '" + path_ + "' must be an object");
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            const std::string& k = it.key();
            if (std::find_if(keys.begin(), keys.end(),
                             [&](const char* a) { return k == a; }) == keys.end())
                throw ConfigError("config: unknown key '" + join(k.c_str()) + "'");
        }
    }

    double number(const char* key, const std::map<std::string, double>& vars) const {
        return to_number(child(key), &vars);
    }

    double number_or(const char* key, const std::map<std::string, double>& vars,
                     double fallback) const {
        if (!has(key)) return fallback;
        return to_number(child(key), &vars);
    }

    long integer(const char* key) const {
        Cursor c = child(key);
        if (!c.raw().is_number_integer())
            throw ConfigError("config: '" + c.path() + "' must be an integer");
        return c.raw().get<long>();
    }

    long integer_or(const char* key, long fallback) const {
        if (!has(key)) return fallback;
        return integer(key);
    }

    bool boolean_or(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        Cursor c = child(key);
        if (!c.raw().is_boolean())
            throw ConfigError("config: '" + c.path() + "' must be a boolean");
        return c.raw().get<bool>();
    }

    std::string text(const char* key) const {
        Cursor c = child(key);
        if (!c.raw().is_string())
            throw ConfigError("config: '" + c.path() + "' must be a string");
        return c.raw().get<std::string>();
    }

    std::string text_or(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        return text(key);
    }

    /// Number or arithmetic-expression string.
    double to_number(const Cursor& c, const std::map<std::string, double>* vars = nullptr) const {
        double v = 0.0;
        if (c.raw().is_number()) {
            v = c.raw().get<double>();
        } else if (c.raw().is_string()) {
            static const std::map<std::string, double> empty;
            try {
                v = expr::evaluate(c.raw().get<std::string>(), vars ? *vars : empty);
            } catch (const ConfigError& e) {
                throw ConfigError("config: '" + c.path() + "': " + e.what());
            }
        } else {
            throw ConfigError("config: '" + c.path() + "' must be a number or expression string");
        }
        if (!std::isfinite(v))
            throw ConfigError("config: '" + c.path() + "' evaluates to a non-finite value");
        return v;
    }

private:
    std::string join(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    const nlohmann::json* j_;
    std::string path_;
};

inline std::array<double, 3> point_from(const Cursor& parent, const char* key, int dim,
                                        const std::map<std::string, double>& vars) {
    Cursor c = parent.child(key);
    if (!c.raw().is_array() || static_cast<int>(c.raw().size()) != dim)
        throw ConfigError("config: '" + c.path() + "' must be an array of " +
                          std::to_string(dim) + " coordinates");
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a)
        p[static_cast<std::size_t>(a)] =
            c.to_number(Cursor(c.raw()[static_cast<std::size_t>(a)],
                               c.path() + "[" + std::to_string(a) + "]"),
                        &vars);
    return p;
}

inline std::vector<BallSpec> balls_from(const Cursor& parent, const char* key, int dim,
                                        const std::map<std::string, double>& vars) {
    Cursor c = parent.child(key);
    if (!c.raw().is_array() || c.raw().empty())
        throw ConfigError("config: '" + c.path() + "' must be a non-empty array of balls");
    std::vector<BallSpec> balls;
    for (std::size_t i = 0; i < c.raw().size(); ++i) {
        Cursor b(c.raw()[i], c.path() + "[" + std::to_string(i) + "]");
        b.allow_only({"center", "radius"});
        BallSpec spec;
        spec.center = point_from(b, "center", dim, vars);
        spec.radius = b.to_number(b.child("radius"), &vars);
        if (!(spec.radius > 0.0))
            throw ConfigError("config: '" + b.path() + ".radius' must be > 0");
        balls.push_back(spec);
    }
    return balls;
}

inline Shape parse_init(const Cursor& root, int dim, const std::map<std::string, double>& vars) {
    Cursor c = root.child("init");
    const std::string kind = c.text("kind");
    if (kind == "ball") {
        c.allow_only({"kind", "center", "radius"});
        BallSpec b;
        b.center = point_from(c, "center", dim, vars);
        b.radius = c.to_number(c.child("radius"), &vars);
        if (!(b.radius > 0.0)) throw ConfigError("config: 'init.radius' must be > 0");
        return Shape::ball(b);
    }
    if (kind == "balls") {
        c.allow_only({"kind", "balls"});
        return Shape::ball_union(balls_from(c, "balls", dim, vars));
    }
    if (kind == "blob") {
        c.allow_only({"kind", "balls", "smoothing"});
        const double smoothing = c.number_or("smoothing", vars, 0.0);
        return Shape::blob(balls_from(c, "balls", dim, vars), smoothing);
    }
    if (kind == "tube") {
        c.allow_only({"kind", "axis", "center", "radius", "half_length"});
        const long axis = c.integer_or("axis", 0);
        if (axis < 0 || axis >= dim)
            throw ConfigError("config: 'init.axis' out of range for the grid dimension");
        return Shape::tube(static_cast<int>(axis), point_from(c, "center", dim, vars),
                           c.to_number(c.child("radius"), &vars),
                           c.number_or("half_length", vars, 0.0));
    }
    if (kind == "plate") {
        c.allow_only({"kind", "axis", "center", "half_thickness"});
        const long axis = c.integer_or("axis", dim - 1);
        if (axis < 0 || axis >= dim)
            throw ConfigError("config: 'init.axis' out of range for the grid dimension");
        return Shape::plate(static_cast<int>(axis), c.number_or("center", vars, 0.5),
                            c.to_number(c.child("half_thickness"), &vars));
    }
    if (kind == "noise") {
        c.allow_only({"kind", "amplitude", "seed"});
        const double amplitude = c.number_or("amplitude", vars, 1.0);
        const long seed = c.integer_or("seed", 0);
        if (seed < 0) throw ConfigError("config: 'init.seed' must be >= 0");
        return Shape::noise(amplitude, static_cast<std::uint64_t>(seed));
    }
    throw ConfigError("config: 'init.kind' must be one of "
                      "ball|balls|blob|tube|plate|noise, got '" + kind + "'");
}

} // namespace detail

/// Parse and validate a run configuration document, applying the documented
/// defaults: eps = 2*max h, dt = eps^4, alpha = 2, beta = 2/eps^2, gamma = 1,
/// m = 1 (or max M for the degenerate-mobility model). Unknown keys anywhere
/// are errors.
inline RunConfig parse_config(const nlohmann::json& doc) {
    detail::Cursor root(doc, "");
    root.allow_only({"grid", "model", "init", "schedule", "output"});

    // Grid first: it defines the spacing variable h.
    detail::Cursor gc = root.child("grid");
    gc.allow_only({"dim", "sizes", "lengths"});
    detail::Cursor sizes_c = gc.child("sizes");
    if (!sizes_c.raw().is_array() || sizes_c.raw().empty())
        throw ConfigError("config: 'grid.sizes' must be a non-empty array of integers");
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < sizes_c.raw().size(); ++i) {
        const auto& e = sizes_c.raw()[i];
        if (!e.is_number_integer() || e.get<long>() <= 0)
            throw ConfigError("config: 'grid.sizes[" + std::to_string(i) +
                              "]' must be a positive integer");
        sizes.push_back(static_cast<std::size_t>(e.get<long>()));
    }
    std::vector<double> lengths(sizes.size(), 1.0);
    if (gc.has("lengths")) {
        detail::Cursor lc = gc.child("lengths");
        if (!lc.raw().is_array() || lc.raw().size() != sizes.size())
            throw ConfigError("config: 'grid.lengths' must match 'grid.sizes' in length");
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            detail::Cursor e(lc.raw()[i], lc.path() + "[" + std::to_string(i) + "]");
            lengths[i] = lc.to_number(e);
        }
    }
    if (gc.has("dim") && gc.integer("dim") != static_cast<long>(sizes.size()))
        throw ConfigError("config: 'grid.dim' disagrees with the number of entries in "
                          "'grid.sizes'");
    GridSpec grid(sizes, lengths);

    std::map<std::string, double> vars{{"pi", std::numbers::pi}, {"h", grid.max_spacing()}};

    // Model block; eps resolves before everything that may reference it.
    detail::Cursor mc = root.child("model");
    mc.allow_only({"name", "epsilon", "dt", "alpha", "m", "beta", "gamma", "mobility_scale",
                   "dealias"});
    const std::string name = mc.text("name");
    Model model;
    if (name == "cch") model = Model::CCH;
    else if (name == "mch") model = Model::MCH;
    else if (name == "nmn") model = Model::NMNCH;
    else
        throw ConfigError("config: 'model.name' must be one of cch|mch|nmn, got '" + name +
                          "'");

    const double eps = mc.number_or("epsilon", vars, 2.0 * grid.max_spacing());
    if (!(eps > 0.0)) throw ConfigError("config: 'model.epsilon' must be > 0");
    vars["eps"] = eps;

    ModelParams p;
    p.model = model;
    p.epsilon = eps;
    p.dt = mc.number_or("dt", vars, eps * eps * eps * eps);
    p.alpha = mc.number_or("alpha", vars, 2.0);
    p.gamma = mc.number_or("gamma", vars, 1.0);
    p.mobility_scale = mc.number_or("mobility_scale", vars, 36.0);
    p.beta = mc.number_or("beta", vars,
                          model == Model::NMNCH ? 2.0 / (eps * eps) : 0.0);
    p.m = mc.number_or("m", vars, model == Model::MCH ? p.mch_mobility_max() : 1.0);
    p.dealias = mc.boolean_or("dealias", false);
    p.validate();

    Shape init = detail::parse_init(root, grid.dim(), vars);

    // Schedule: exactly one of steps / time (an absent block means 0 steps,
    // i.e. only the initial diagnostics are produced).
    Schedule sched;
    if (root.has("schedule")) {
        detail::Cursor sc = root.child("schedule");
        sc.allow_only({"steps", "time", "diag_stride", "snapshot_stride"});
        if (sc.has("steps") == sc.has("time"))
            throw ConfigError("config: 'schedule' needs exactly one of 'steps' or 'time'");
        if (sc.has("steps")) {
            sched.steps = sc.integer("steps");
        } else {
            const double t = sc.number("time", vars);
            if (!(t >= 0.0)) throw ConfigError("config: 'schedule.time' must be >= 0");
            sched.steps = std::llround(t / p.dt);
        }
        if (sched.steps < 0) throw ConfigError("config: 'schedule.steps' must be >= 0");
        sched.diag_stride = sc.integer_or("diag_stride", 1);
        sched.snapshot_stride = sc.integer_or("snapshot_stride", std::max(sched.steps, 1L));
        if (sched.diag_stride < 1)
            throw ConfigError("config: 'schedule.diag_stride' must be >= 1");
        if (sched.snapshot_stride < 1)
            throw ConfigError("config: 'schedule.snapshot_stride' must be >= 1");
    } else {
        sched.steps = 0;
        sched.snapshot_stride = 1;
    }

    // Output options.
    OutputOptions out;
    if (grid.dim() == 3) out.slice_axes = {2};
    if (root.has("output")) {
        detail::Cursor oc = root.child("output");
        oc.allow_only({"dir", "formats", "slice_axes"});
        out.dir = oc.text_or("dir", out.dir);
        if (oc.has("formats")) {
            detail::Cursor fc = oc.child("formats");
            if (!fc.raw().is_array())
                throw ConfigError("config: 'output.formats' must be an array");
            out.csv = out.raw = out.pgm = false;
            for (const auto& e : fc.raw()) {
                const std::string f = e.is_string() ? e.get<std::string>() : std::string();
                if (f == "csv") out.csv = true;
                else if (f == "raw") out.raw = true;
                else if (f == "pgm") out.pgm = true;
                else
                    throw ConfigError("config: 'output.formats' entries must be "
                                      "csv|raw|pgm");
            }
        }
        if (oc.has("slice_axes")) {
            detail::Cursor ac = oc.child("slice_axes");
            if (!ac.raw().is_array())
                throw ConfigError("config: 'output.slice_axes' must be an array");
            out.slice_axes.clear();
            for (const auto& e : ac.raw()) {
                if (!e.is_number_integer() || e.get<long>() < 0 ||
                    e.get<long>() >= grid.dim())
                    throw ConfigError("config: 'output.slice_axes' entries must be axis "
                                      "indices below the grid dimension");
                out.slice_axes.push_back(static_cast<int>(e.get<long>()));
            }
        }
    }

    return RunConfig{std::move(grid), p, std::move(init), sched, std::move(out)};
}

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

/// Apply a `path.to.key=value` override onto a config document. The value is
/// parsed as JSON when possible, otherwise taken as a string (so expressions
/// like eps^4 need no extra quoting on the command line).
inline void apply_override(nlohmann::json& doc, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + spec + "' must have the form key.path=value");
    const std::string path = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);
    nlohmann::json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("override '" + spec + "': empty key segment");
        if (dot == std::string::npos) {
            nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

} // namespace chsim
