#include "rflab/config.hpp"

#include "rflab/error.hpp"
#include "rflab/random.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace rflab {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"metric", {"family", "nx", "ny", "lx", "ly", "n", "r2", "initial", "amplitude", "modes", "file"}},
        {"flow", {"kind", "provider", "s", "provider_k", "test_function", "T", "dt", "blowup_cap"}},
        {"monitor", {"k", "tau0", "weights"}},
        {"solver", {"tolerance", "max_iterations"}},
        {"random", {"seed"}},
        {"output", {"root", "name"}},
        {"suite", {"families", "k", "s", "grid", "amplitude", "sphere_n", "sphere_r2", "steps", "dt", "checks"}},
        {"sweep", {"k", "s"}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& key) const {
        const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) return std::nullopt;
        // Strip trailing comments.
        std::string s = *v;
        const auto c = s.find_first_of(";#");
        if (c != std::string::npos) s = s.substr(0, c);
        return trim(s);
    }

    double real(const std::string& key, double fallback) const {
        const auto v = raw(key);
        return v ? parse_real(key, *v) : fallback;
    }

    long integer(const std::string& key, long fallback) const {
        const auto v = raw(key);
        if (!v) return fallback;
        const double d = parse_real(key, *v);
        if (d != std::floor(d) || std::abs(d) > 1e15) throw ConfigInvalid(key, "expected an integer, got '" + *v + "'");
        return static_cast<long>(d);
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        const auto v = raw(key);
        return v ? *v : fallback;
    }

    std::optional<double> real_or_auto(const std::string& key, std::optional<double> fallback) const {
        const auto v = raw(key);
        if (!v) return fallback;
        if (*v == "auto" || v->empty()) return std::nullopt;
        return parse_real(key, *v);
    }

    bool flag(const std::string& key, bool fallback) const {
        const auto v = raw(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "yes" || *v == "1") return true;
        if (*v == "false" || *v == "no" || *v == "0") return false;
        throw ConfigInvalid(key, "expected true or false, got '" + *v + "'");
    }

    std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) const {
        const auto v = raw(key);
        if (!v) return fallback;
        std::vector<std::string> out;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const {
        const auto v = raw(key);
        if (!v) return fallback;
        std::vector<double> out;
        for (const auto& item : list(key, {})) out.push_back(parse_real(key, item));
        if (out.empty()) throw ConfigInvalid(key, "expected a non-empty comma-separated list");
        return out;
    }

private:
    static double parse_real(const std::string& key, const std::string& v) {
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
            throw ConfigInvalid(key, "expected a finite number, got '" + v + "'");
        return d;
    }

    const pt::ptree& tree_;
};

void require(bool ok, const std::string& field, const std::string& reason) {
    if (!ok) throw ConfigInvalid(field, reason);
}

void require_k_list(const std::vector<double>& ks, const std::string& field) {
    require(!ks.empty(), field, "needs at least one value");
    for (double k : ks) require(k >= 1.0, field, "every k must be >= 1, got " + fmt17(k));
}

void require_grid(int n, const std::string& field) {
    require(n >= 8 && n <= 1024 && n % 2 == 0, field, "must be an even integer in [8, 1024]");
}

FlowKind parse_kind(const std::string& v) {
    if (v == "ricci") return FlowKind::ricci;
    if (v == "rescaled") return FlowKind::rescaled;
    if (v == "normalized") return FlowKind::normalized;
    throw ConfigInvalid("flow.kind", "expected ricci, rescaled or normalized, got '" + v + "'");
}

InitialKind parse_initial(const std::string& v) {
    if (v == "zero") return InitialKind::zero;
    if (v == "sinusoid") return InitialKind::sinusoid;
    if (v == "random") return InitialKind::random;
    if (v == "file") return InitialKind::file;
    throw ConfigInvalid("metric.initial", "expected zero, sinusoid, random or file, got '" + v + "'");
}

const char* initial_name(InitialKind k) {
    switch (k) {
        case InitialKind::zero: return "zero";
        case InitialKind::sinusoid: return "sinusoid";
        case InitialKind::random: return "random";
        case InitialKind::file: return "file";
    }
    return "?";
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : ",") + fmt17(x);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ",") + x;
    return out;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& origin) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigInvalid("config", origin + ": " + e.message() + " at line " + std::to_string(e.line()));
    }
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end() || !body.data().empty())
            throw ConfigInvalid(section, "unknown section (or key outside a section) in " + origin);
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigInvalid(section + "." + key, "unknown key in " + origin);
    }

    const Reader r(tree);
    RunConfig c;
    c.family = r.text("metric.family", c.family);
    require(c.family == "torus" || c.family == "sphere", "metric.family", "expected torus or sphere");
    c.nx = static_cast<int>(r.integer("metric.nx", c.nx));
    c.ny = static_cast<int>(r.integer("metric.ny", c.ny));
    require_grid(c.nx, "metric.nx");
    require_grid(c.ny, "metric.ny");
    c.lx = r.real("metric.lx", c.lx);
    c.ly = r.real("metric.ly", c.ly);
    require(c.lx > 0.0, "metric.lx", "must be positive");
    require(c.ly > 0.0, "metric.ly", "must be positive");
    c.sphere_n = static_cast<int>(r.integer("metric.n", c.sphere_n));
    require(c.sphere_n >= 2 && c.sphere_n <= 64, "metric.n", "must be an integer in [2, 64]");
    c.sphere_r2 = r.real("metric.r2", c.sphere_r2);
    require(c.sphere_r2 > 0.0, "metric.r2", "must be positive");
    c.initial = parse_initial(r.text("metric.initial", initial_name(c.initial)));
    c.amplitude = r.real("metric.amplitude", c.amplitude);
    require(std::abs(c.amplitude) <= 5.0, "metric.amplitude", "must lie in [-5, 5]");
    c.modes = static_cast<int>(r.integer("metric.modes", c.modes));
    require(c.modes >= 1 && c.modes < std::min(c.nx, c.ny) / 2, "metric.modes", "must be in [1, grid/2)");
    c.initial_file = r.text("metric.file", c.initial_file);
    require(c.initial != InitialKind::file || !c.initial_file.empty(), "metric.file",
            "required when metric.initial = file");

    c.kind = parse_kind(r.text("flow.kind", to_string(c.kind)));
    c.provider = r.text("flow.provider", c.provider);
    require(c.provider == "constant" || c.provider == "average_scalar" || c.provider == "eigen_normalized" ||
                c.provider == "test_function",
            "flow.provider", "expected constant, average_scalar, eigen_normalized or test_function");
    c.s = r.real("flow.s", c.s);
    c.provider_k = r.real("flow.provider_k", c.provider_k);
    require(c.provider_k >= 1.0, "flow.provider_k", "must be >= 1");
    c.test_function = r.text("flow.test_function", c.test_function);
    require(c.test_function == "zero" || c.test_function == "eigen", "flow.test_function", "expected zero or eigen");
    c.T = r.real("flow.T", c.T);
    require(c.T > 0.0, "flow.T", "must be positive");
    c.dt = r.real_or_auto("flow.dt", c.dt);
    require(!c.dt || *c.dt > 0.0, "flow.dt", "must be positive or auto");
    c.flow.blowup_cap = r.real("flow.blowup_cap", c.flow.blowup_cap);
    require(c.flow.blowup_cap > 0.0, "flow.blowup_cap", "must be positive");

    c.k_values = r.reals("monitor.k", c.k_values);
    require_k_list(c.k_values, "monitor.k");
    c.tau0 = r.real_or_auto("monitor.tau0", c.tau0);
    c.weights = r.flag("monitor.weights", c.weights);

    c.solver.tolerance = r.real("solver.tolerance", c.solver.tolerance);
    require(c.solver.tolerance > 0.0 && c.solver.tolerance <= 1e-3, "solver.tolerance", "must lie in (0, 1e-3]");
    c.solver.max_iterations = static_cast<int>(r.integer("solver.max_iterations", c.solver.max_iterations));
    require(c.solver.max_iterations >= 1, "solver.max_iterations", "must be >= 1");
    c.flow.solver = c.solver;

    const long seed = r.integer("random.seed", static_cast<long>(c.seed));
    require(seed >= 0, "random.seed", "must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(seed);

    c.output_root = r.text("output.root", c.output_root);
    require(!c.output_root.empty(), "output.root", "must not be empty");
    if (const auto name = r.raw("output.name")) {
        require(!name->empty() && name->find('/') == std::string::npos && *name != "." && *name != "..",
                "output.name", "must be a plain directory name");
        c.name = *name;
    }

    SuiteConfig& s = c.suite;
    s.families = r.list("suite.families", s.families);
    require(!s.families.empty(), "suite.families", "needs at least one family");
    for (const auto& f : s.families) require(f == "torus" || f == "sphere", "suite.families", "unknown family '" + f + "'");
    s.k_values = r.reals("suite.k", s.k_values);
    require_k_list(s.k_values, "suite.k");
    s.s_values = r.reals("suite.s", s.s_values);
    s.grid = static_cast<int>(r.integer("suite.grid", s.grid));
    require_grid(s.grid, "suite.grid");
    s.amplitude = r.real("suite.amplitude", s.amplitude);
    require(std::abs(s.amplitude) <= 5.0, "suite.amplitude", "must lie in [-5, 5]");
    s.sphere_n = static_cast<int>(r.integer("suite.sphere_n", s.sphere_n));
    require(s.sphere_n >= 2 && s.sphere_n <= 64, "suite.sphere_n", "must be an integer in [2, 64]");
    s.sphere_r2 = r.real("suite.sphere_r2", s.sphere_r2);
    require(s.sphere_r2 > 0.0, "suite.sphere_r2", "must be positive");
    s.steps = static_cast<int>(r.integer("suite.steps", s.steps));
    require(s.steps >= 3, "suite.steps", "must be >= 3");
    const std::optional<double> suite_dt = r.real_or_auto("suite.dt", std::nullopt);
    require(!suite_dt || *suite_dt > 0.0, "suite.dt", "must be positive or auto");
    s.dt = suite_dt.value_or(0.0);
    s.checks = r.list("suite.checks", s.checks);
    s.seed = c.seed;
    s.solver = c.solver;

    c.sweep_k = r.reals("sweep.k", c.sweep_k);
    require_k_list(c.sweep_k, "sweep.k");
    c.sweep_s = r.reals("sweep.s", c.sweep_s);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("config", "cannot read config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

Metric initial_metric(const RunConfig& c) {
    if (c.family == "sphere") return RoundSphere(c.sphere_n, c.sphere_r2);
    switch (c.initial) {
        case InitialKind::zero: return ConformalTorus::flat(c.nx, c.ny, c.lx, c.ly);
        case InitialKind::sinusoid: {
            const double a = c.amplitude, m = c.modes, lx = c.lx, ly = c.ly;
            return ConformalTorus::from_function(c.nx, c.ny, c.lx, c.ly, [=](double x, double y) {
                return a * (std::sin(2 * std::numbers::pi * m * x / lx) + 0.5 * std::cos(2 * std::numbers::pi * m * y / ly));
            });
        }
        case InitialKind::random: {
            RandomStream rng = RandomStream(c.seed, "config").split("initial");
            return random_torus(c.nx, c.ny, c.lx, c.ly, rng, c.modes, c.amplitude);
        }
        case InitialKind::file: {
            std::ifstream in(c.initial_file);
            if (!in) throw ConfigInvalid("metric.file", "cannot read '" + c.initial_file + "'");
            ScalarField u(static_cast<std::size_t>(c.nx) * c.ny, 0.0);
            for (std::size_t i = 0; i < u.size(); ++i)
                if (!(in >> u[i]))
                    throw ConfigInvalid("metric.file", "'" + c.initial_file + "' needs " + std::to_string(u.size()) +
                                                           " values (ny rows of nx), found " + std::to_string(i));
            double extra;
            if (in >> extra) throw ConfigInvalid("metric.file", "'" + c.initial_file + "' has more than nx*ny values");
            return ConformalTorus(c.nx, c.ny, c.lx, c.ly, std::move(u));
        }
    }
    throw ConfigInvalid("metric.initial", "unsupported");
}

SProvider make_provider(const RunConfig& c, const Metric& initial) {
    if (c.provider == "constant") return provider::Constant{c.s};
    if (c.provider == "average_scalar") return provider::AverageScalar{};
    if (c.provider == "eigen_normalized") return provider::EigenNormalized{c.provider_k};
    ScalarField phi = constant_field(initial, 0.0);
    if (c.test_function == "eigen") phi = f_from_eigenfunction(lowest_eigenpair(initial, c.provider_k, c.solver));
    return provider::TestFunction{std::move(phi), c.provider_k};
}

double resolve_dt(RunConfig& c, const Metric& initial) {
    if (!c.dt) {
        if (const auto* sp = std::get_if<RoundSphere>(&initial)) {
            c.dt = sp->r2() / (2.0 * (sp->n() - 1)) / 250.0;
        } else {
            c.dt = 0.5 * cfl_bound(initial, c.flow);
        }
    }
    return *c.dt;
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> out{
        {"metric.family", c.family},
        {"metric.nx", std::to_string(c.nx)},
        {"metric.ny", std::to_string(c.ny)},
        {"metric.lx", fmt17(c.lx)},
        {"metric.ly", fmt17(c.ly)},
        {"metric.n", std::to_string(c.sphere_n)},
        {"metric.r2", fmt17(c.sphere_r2)},
        {"metric.initial", initial_name(c.initial)},
        {"metric.amplitude", fmt17(c.amplitude)},
        {"metric.modes", std::to_string(c.modes)},
        {"metric.file", c.initial_file},
        {"flow.kind", to_string(c.kind)},
        {"flow.provider", c.provider},
        {"flow.s", fmt17(c.s)},
        {"flow.provider_k", fmt17(c.provider_k)},
        {"flow.test_function", c.test_function},
        {"flow.T", fmt17(c.T)},
        {"flow.dt", c.dt ? fmt17(*c.dt) : "auto"},
        {"flow.blowup_cap", fmt17(c.flow.blowup_cap)},
        {"monitor.k", join(c.k_values)},
        {"monitor.tau0", c.tau0 ? fmt17(*c.tau0) : "auto"},
        {"monitor.weights", c.weights ? "true" : "false"},
        {"solver.tolerance", fmt17(c.solver.tolerance)},
        {"solver.max_iterations", std::to_string(c.solver.max_iterations)},
        {"random.seed", std::to_string(c.seed)},
        {"output.root", output_directory(c).parent_path().string()},
        {"output.name", c.name.value_or("")},
        {"suite.families", join(c.suite.families)},
        {"suite.k", join(c.suite.k_values)},
        {"suite.s", join(c.suite.s_values)},
        {"suite.grid", std::to_string(c.suite.grid)},
        {"suite.amplitude", fmt17(c.suite.amplitude)},
        {"suite.sphere_n", std::to_string(c.suite.sphere_n)},
        {"suite.sphere_r2", fmt17(c.suite.sphere_r2)},
        {"suite.steps", std::to_string(c.suite.steps)},
        {"suite.dt", c.suite.dt > 0.0 ? fmt17(c.suite.dt) : "auto"},
        {"suite.checks", join(c.suite.checks)},
        {"sweep.k", join(c.sweep_k)},
        {"sweep.s", join(c.sweep_s)},
    };
    return out;
}

std::filesystem::path output_directory(const RunConfig& c, const std::string& default_name) {
    const char* env = std::getenv("RFLAB_OUTPUT_ROOT");
    const std::filesystem::path root = env && *env ? std::filesystem::path(env) : std::filesystem::path(c.output_root);
    return root / c.name.value_or(default_name);
}

}  // namespace rflab
