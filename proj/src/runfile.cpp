#include "nsv/runfile.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nsv/error.hpp"
#include "nsv/spectral.hpp"

namespace nsv {
namespace {

using json = nlohmann::json;

// Typed access to one JSON object with a key whitelist.
class Section {
public:
    Section(const json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (obj_ && !obj_->is_object()) throw ValidationError(where() + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        if (!obj_) return;
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!ok.count(it.key())) throw ValidationError("unknown key '" + sub(it.key()) + "'");
    }

    bool has(const char* key) const { return obj_ && obj_->contains(key); }
    const json* child(const char* key) const { return has(key) ? &(*obj_)[key] : nullptr; }
    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = (*obj_)[key];
        if (!v.is_number()) throw ValidationError(sub(key) + ": expected a number");
        return v.get<double>();
    }

    long integer(const char* key, long fallback) const {
        if (!has(key)) return fallback;
        const json& v = (*obj_)[key];
        if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == std::floor(v.get<double>())))
            throw ValidationError(sub(key) + ": expected an integer");
        return static_cast<long>(v.get<double>());
    }

    std::string text(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = (*obj_)[key];
        if (!v.is_string()) throw ValidationError(sub(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const json& v, const std::string& path) const {
        if (!v.is_array()) throw ValidationError(path + ": expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ValidationError(path + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    std::string where() const { return path_.empty() ? "document" : path_; }
    const json* obj_;
    std::string path_;
};

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Kernel read_kernel(const Section& s, const std::string& base_dir) {
    s.allow({"variant", "coefficients", "table", "normalization", "epsilon"});
    const std::string norm_s = s.text("normalization", "unit_mass");
    Normalization norm;
    if (norm_s == "unit_mass") norm = Normalization::unit_mass;
    else if (norm_s == "as_given") norm = Normalization::as_given;
    else throw ValidationError(s.sub("normalization") + ": expected 'unit_mass' or 'as_given'");
    const std::string variant = s.text("variant", "exponential");
    Kernel k = Kernel::exponential_sum({{1.0, 1.0}}, norm);
    if (variant == "exponential") {
        if (s.has("table")) throw ValidationError(s.sub("table") + ": not allowed for an exponential kernel");
        if (const json* c = s.child("coefficients")) {
            if (!c->is_array() || c->empty()) throw ValidationError(s.sub("coefficients") + ": expected [[c, d], ...]");
            std::vector<std::pair<double, double>> terms;
            for (std::size_t i = 0; i < c->size(); ++i) {
                const std::string p = s.sub("coefficients") + "[" + std::to_string(i) + "]";
                auto v = s.numbers((*c)[i], p);
                if (v.size() != 2) throw ValidationError(p + ": expected [c, d]");
                terms.emplace_back(v[0], v[1]);
            }
            k = Kernel::exponential_sum(terms, norm);
        }
    } else if (variant == "tabulated") {
        if (s.has("coefficients")) throw ValidationError(s.sub("coefficients") + ": not allowed for a tabulated kernel");
        const json* t = s.child("table");
        if (!t) throw ValidationError(s.sub("table") + ": required for a tabulated kernel");
        if (t->is_string()) {
            std::filesystem::path p(t->get<std::string>());
            if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
            k = Kernel::from_csv(p.string(), norm);
        } else {
            Section tab(t, s.sub("table"));
            tab.allow({"s", "mu"});
            if (!tab.has("s") || !tab.has("mu")) throw ValidationError(s.sub("table") + ": needs 's' and 'mu'");
            k = Kernel::tabulated(tab.numbers(*tab.child("s"), tab.sub("s")), tab.numbers(*tab.child("mu"), tab.sub("mu")),
                                  norm);
        }
    } else {
        throw ValidationError(s.sub("variant") + ": expected 'exponential' or 'tabulated'");
    }
    const double eps = s.number("epsilon", 1.0);
    if (eps != 1.0) k = rescale(k, eps);
    return k;
}

SpectralField read_forcing(const json* f, const GridPtr& grid) {
    SpectralField out;
    if (!f) return out;
    if (f->is_string()) {
        if (f->get<std::string>() != "zero") throw ValidationError("forcing: expected \"zero\" or an object");
        return out;
    }
    Section s(f, "forcing");
    s.allow({"modes"});
    const json* modes = s.child("modes");
    if (!modes) return out;
    if (!modes->is_array()) throw ValidationError("forcing.modes: expected an array");
    if (modes->empty()) return out;
    out = SpectralField(grid);
    for (std::size_t i = 0; i < modes->size(); ++i) {
        const std::string p = "forcing.modes[" + std::to_string(i) + "]";
        Section m(&(*modes)[i], p);
        m.allow({"k", "amplitude", "phase"});
        if (!m.has("k") || !m.has("amplitude")) throw ValidationError(p + ": needs 'k' and 'amplitude'");
        auto kv = m.numbers(*m.child("k"), m.sub("k"));
        auto av = m.numbers(*m.child("amplitude"), m.sub("amplitude"));
        if (kv.size() != static_cast<std::size_t>(grid->dim()) || av.size() != kv.size())
            throw DimensionError(p + ": k and amplitude need " + std::to_string(grid->dim()) + " entries");
        Wavevector k{0, 0, 0};
        std::array<double, 3> a{0.0, 0.0, 0.0};
        for (std::size_t c = 0; c < kv.size(); ++c) {
            if (kv[c] != std::floor(kv[c])) throw ValidationError(m.sub("k") + ": expected integers");
            k[c] = static_cast<int>(kv[c]);
            a[c] = av[c];
        }
        const std::string phase = m.text("phase", "sin");
        if (phase != "sin" && phase != "cos") throw ValidationError(m.sub("phase") + ": expected 'sin' or 'cos'");
        auto hit = grid->find(k);
        if (hit.index < 0) throw DomainError(p + ": wavevector outside the dealiased band");
        add_real_mode(out, k, a, phase == "sin");
    }
    leray_project_in_place(out);
    return out;
}

}  // namespace

bool RunFile::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::uint64_t config_hash(const nlohmann::json& doc) {
    const std::string s = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

RunFile parse_runfile(const std::string& text, const std::string& origin) {
    RunFile rf;
    rf.origin = origin;
    try {
        rf.doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        const auto pos = msg.find("syntax error");
        throw ValidationError(origin + ": " + line_col(text, e.byte) + ": " +
                              (pos == std::string::npos ? msg : msg.substr(pos)));
    }
    std::string base_dir;
    if (origin != "<string>") base_dir = std::filesystem::path(origin).parent_path().string();
    try {
        Section root(&rf.doc, "");
        root.allow({"domain", "model", "kernel", "damping", "forcing", "time", "history", "experiment", "output"});

        Section dom(root.child("domain"), "domain");
        dom.allow({"dim", "n"});
        const long dim = dom.integer("dim", 2);
        const long n = dom.integer("n", dim == 3 ? 32 : 64);
        ModelConfig& m = rf.model;
        m.grid = Grid::make(static_cast<int>(dim), static_cast<int>(n));

        Section mod(root.child("model"), "model");
        mod.allow({"alpha", "varrho", "eps_report", "instantaneous"});
        m.alpha = mod.number("alpha", m.alpha);
        m.varrho = mod.number("varrho", m.varrho);
        m.eps_report = mod.number("eps_report", m.eps_report);
        if (const json* inst = mod.child("instantaneous")) {
            if (!inst->is_boolean()) throw ValidationError("model.instantaneous: expected true or false");
            m.instantaneous = inst->get<bool>();
        }

        m.kernel = read_kernel(Section(root.child("kernel"), "kernel"), base_dir);

        Section damp(root.child("damping"), "damping");
        damp.allow({"beta", "theta"});
        m.beta = damp.number("beta", m.beta);
        m.theta = damp.number("theta", m.theta);

        m.forcing = read_forcing(root.child("forcing"), m.grid);

        Section time(root.child("time"), "time");
        time.allow({"dt", "t_end", "stride"});
        m.dt = time.number("dt", m.dt);
        m.t_end = time.number("t_end", m.t_end);
        m.stride = static_cast<int>(time.integer("stride", m.stride));

        Section hist(root.child("history"), "history");
        hist.allow({"mode", "M", "s_max_factor", "ds_min"});
        const std::string mode = hist.text("mode", "auto");
        if (mode == "auto") m.history.mode = m.kernel.is_exponential() ? HistoryMode::prony : HistoryMode::grid;
        else if (mode == "prony") m.history.mode = HistoryMode::prony;
        else if (mode == "grid") m.history.mode = HistoryMode::grid;
        else throw ValidationError("history.mode: expected 'auto', 'prony' or 'grid'");
        const long M = hist.integer("M", static_cast<long>(m.history.M));
        if (M < 8) throw ValidationError("history.M: expected at least 8");
        m.history.M = static_cast<std::size_t>(M);
        m.history.s_max_factor = hist.number("s_max_factor", m.history.s_max_factor);
        m.history.ds_min = hist.number("ds_min", m.history.ds_min);
        if (!(m.history.s_max_factor > 0.0)) throw ValidationError("history.s_max_factor: expected > 0");
        if (m.history.ds_min < 0.0) throw ValidationError("history.ds_min: expected >= 0");

        Section exp(root.child("experiment"), "experiment");
        exp.allow({"name", "seed", "parameters"});
        rf.scenario = exp.text("name", "");
        const long seed = exp.integer("seed", 1);
        if (seed < 0) throw ValidationError("experiment.seed: expected >= 0");
        rf.seed = static_cast<std::uint64_t>(seed);
        if (const json* p = exp.child("parameters")) {
            if (!p->is_object()) throw ValidationError("experiment.parameters: expected an object");
            rf.parameters = *p;
        }

        Section out(root.child("output"), "output");
        out.allow({"directory", "formats"});
        rf.out_dir = out.text("directory", rf.out_dir);
        if (const json* f = out.child("formats")) {
            if (!f->is_array()) throw ValidationError("output.formats: expected an array");
            rf.formats.clear();
            for (const auto& v : *f) {
                if (!v.is_string()) throw ValidationError("output.formats: expected strings");
                const std::string s = v.get<std::string>();
                if (s != "csv" && s != "json" && s != "field" && s != "checkpoint")
                    throw ValidationError("output.formats: unknown format '" + s + "'");
                rf.formats.push_back(s);
            }
        }
        m.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    } catch (const DomainError& e) {
        throw ValidationError(origin + ": " + e.what());
    } catch (const DimensionError& e) {
        throw ValidationError(origin + ": " + e.what());
    } catch (const UnsupportedError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    rf.hash = config_hash(rf.doc);
    return rf;
}

RunFile load_runfile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open run file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_runfile(ss.str(), path);
}

RunFile default_runfile() {
    static const char* text = R"({
  "domain": {"dim": 2, "n": 64},
  "model": {"alpha": 0.1},
  "kernel": {"variant": "exponential", "coefficients": [[1.0, 1.0]]},
  "damping": {"beta": 0.5, "theta": 0.0},
  "forcing": {"modes": [{"k": [0, 1], "amplitude": [2.0, 0.0]}, {"k": [1, 0], "amplitude": [0.0, 2.0]}]},
  "time": {"dt": 1e-3, "t_end": 20.0, "stride": 10},
  "history": {"mode": "auto", "M": 256, "s_max_factor": 40.0}
})";
    return parse_runfile(text, "<default>");
}

Parameters::Parameters(const nlohmann::json& p, std::vector<std::string> allowed, const std::string& scenario)
    : p_(p), scenario_(scenario) {
    for (auto it = p_.begin(); it != p_.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ValidationError("experiment.parameters: unknown key '" + it.key() + "' for scenario '" + scenario_ +
                                  "'");
}

double Parameters::number(const std::string& key, double fallback) const {
    if (!p_.contains(key)) return fallback;
    if (!p_[key].is_number()) throw ValidationError("experiment.parameters." + key + ": expected a number");
    return p_[key].get<double>();
}

std::vector<double> Parameters::list(const std::string& key, std::vector<double> fallback) const {
    if (!p_.contains(key)) return fallback;
    const auto& v = p_[key];
    if (!v.is_array() || v.empty()) throw ValidationError("experiment.parameters." + key + ": expected a non-empty array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError("experiment.parameters." + key + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace nsv
