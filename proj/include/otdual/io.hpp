#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "otdual/certificate.hpp"
#include "otdual/certify.hpp"
#include "otdual/lp.hpp"
#include "otdual/model.hpp"
#include "otdual/problem.hpp"
#include "otdual/solvers/strassen.hpp"

namespace otdual::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Schema or value error; `field` is a JSON path such as "marginals[1].fixed".
class InstanceError : public std::runtime_error {
public:
    InstanceError(const std::string& field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(field) {}
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::string field_;
};

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw InstanceError(path, std::string("missing field \"") + key + "\"");
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw InstanceError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw InstanceError(path, "number must be finite");
    return v;
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw InstanceError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline void flatten_dense(const json& j, const GridShape& sh, std::size_t depth, const std::string& path,
                          std::vector<double>& out) {
    if (depth == sh.num_axes()) {
        out.push_back(number(j, path));
        return;
    }
    if (!j.is_array() || j.size() != sh.axis_size(depth)) {
        throw InstanceError(path, "dense block must have " + std::to_string(sh.axis_size(depth)) + " entries on axis " +
                                      std::to_string(depth));
    }
    for (std::size_t i = 0; i < j.size(); ++i) flatten_dense(j[i], sh, depth + 1, path + "[" + std::to_string(i) + "]", out);
}

/// Dense nested array (row-major) or {"default": v, "entries": [{"index": [...], "value": v}]}.
inline std::vector<double> kernel_block(const json& j, const GridShape& sh, const std::string& path) {
    std::vector<double> out;
    if (j.is_array()) {
        flatten_dense(j, sh, 0, path, out);
        return out;
    }
    if (!j.is_object()) throw InstanceError(path, "expected a dense array or a sparse block");
    const double dflt = j.contains("default") ? number(j.at("default"), path + ".default") : 0.0;
    out.assign(sh.size(), dflt);
    if (!j.contains("entries")) return out;
    const json& entries = j.at("entries");
    if (!entries.is_array()) throw InstanceError(path + ".entries", "expected an array");
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const std::string ep = path + ".entries[" + std::to_string(k) + "]";
        const json& idx = require(entries[k], "index", ep);
        if (!idx.is_array() || idx.size() != sh.num_axes()) {
            throw InstanceError(ep + ".index", "index must have one entry per axis");
        }
        MultiIndex mi;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            if (!idx[t].is_number_unsigned() || idx[t].get<std::size_t>() >= sh.axis_size(t)) {
                throw InstanceError(ep + ".index", "index out of range on axis " + std::to_string(t));
            }
            mi.push_back(idx[t].get<std::size_t>());
        }
        out[sh.flat(mi)] = number(require(entries[k], "value", ep), ep + ".value");
    }
    return out;
}

inline json dense_block(const std::vector<double>& v, const GridShape& sh, std::size_t depth = 0, std::size_t offset = 0) {
    json out = json::array();
    for (std::size_t i = 0; i < sh.axis_size(depth); ++i) {
        const std::size_t at = offset + i * sh.strides()[depth];
        if (depth + 1 == sh.num_axes()) {
            out.push_back(v[at]);
        } else {
            out.push_back(dense_block(v, sh, depth + 1, at));
        }
    }
    return out;
}

inline lp::Sense sense(const json& j, const std::string& path) {
    const std::string s = j.is_string() ? j.get<std::string>() : "";
    if (s == "<=") return lp::Sense::LessEqual;
    if (s == ">=") return lp::Sense::GreaterEqual;
    if (s == "=" || s == "==") return lp::Sense::Equal;
    throw InstanceError(path, "sense must be \"<=\", \"=\" or \">=\"");
}

inline std::string sense_text(lp::Sense s) {
    switch (s) {
        case lp::Sense::LessEqual: return "<=";
        case lp::Sense::GreaterEqual: return ">=";
        case lp::Sense::Equal: return "=";
    }
    return "=";
}

inline std::vector<lp::Constraint> constraints(const json& j, const GridShape* sh, std::size_t width,
                                               const std::string& path) {
    if (!j.is_array()) throw InstanceError(path, "expected an array of constraints");
    std::vector<lp::Constraint> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string cp = path + "[" + std::to_string(k) + "]";
        lp::Constraint c;
        const json& coeffs = require(j[k], "coeffs", cp);
        c.coeffs = sh ? kernel_block(coeffs, *sh, cp + ".coeffs") : numbers(coeffs, cp + ".coeffs");
        if (c.coeffs.size() != width) {
            throw InstanceError(cp + ".coeffs", "expected " + std::to_string(width) + " coefficients");
        }
        c.sense = sense(require(j[k], "sense", cp), cp + ".sense");
        c.rhs = number(require(j[k], "rhs", cp), cp + ".rhs");
        out.push_back(std::move(c));
    }
    return out;
}

inline json constraints_json(const std::vector<lp::Constraint>& cs, const GridShape* sh) {
    json out = json::array();
    for (const auto& c : cs) {
        out.push_back({{"coeffs", sh ? dense_block(c.coeffs, *sh) : json(c.coeffs)},
                       {"sense", sense_text(c.sense)},
                       {"rhs", c.rhs}});
    }
    return out;
}

inline ProblemKind kind_from(const std::string& s, const std::string& path) {
    for (ProblemKind k : {ProblemKind::MongeKantorovich, ProblemKind::Capacity, ProblemKind::Schrodinger,
                          ProblemKind::Superhedge, ProblemKind::Strassen, ProblemKind::GenericDual}) {
        if (to_string(k) == s) return k;
    }
    throw InstanceError(path, "unknown kind \"" + s + "\"");
}

inline FamilyTag family_from(const std::string& s, const std::string& path) {
    if (s == "indicator_halfline") return FamilyTag::IndicatorHalfline;
    if (s == "capacity_hinge") return FamilyTag::CapacityHinge;
    if (s == "scaled_exp") return FamilyTag::ScaledExp;
    throw InstanceError(path, "unknown family \"" + s + "\"");
}

inline std::string family_text(FamilyTag t) {
    switch (t) {
        case FamilyTag::IndicatorHalfline: return "indicator_halfline";
        case FamilyTag::CapacityHinge: return "capacity_hinge";
        case FamilyTag::ScaledExp: return "scaled_exp";
        default: break;
    }
    return to_string(t);
}

inline MarginalSpace axis_from(const json& j, const std::string& path) {
    MarginalSpace ax;
    const json& pts = require(j, "points", path);
    if (pts.is_number_unsigned()) {
        ax = MarginalSpace::sized(pts.get<std::size_t>());
    } else if (pts.is_array()) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].is_string()) {
                ax.points.push_back(pts[i].get<std::string>());
            } else if (pts[i].is_number()) {
                ax.points.push_back(pts[i].dump());
            } else {
                throw InstanceError(path + ".points[" + std::to_string(i) + "]", "labels must be strings or numbers");
            }
        }
    } else {
        throw InstanceError(path + ".points", "expected a count or a list of labels");
    }
    if (j.contains("coords")) {
        const json& cs = j.at("coords");
        if (!cs.is_array()) throw InstanceError(path + ".coords", "expected an array");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string cp = path + ".coords[" + std::to_string(i) + "]";
            ax.coords.push_back(cs[i].is_array() ? numbers(cs[i], cp) : std::vector<double>{number(cs[i], cp)});
        }
    }
    if (j.contains("psi")) ax.psi = numbers(j.at("psi"), path + ".psi");
    try {
        ax.validate();
    } catch (const std::invalid_argument& e) {
        throw InstanceError(path, e.what());
    }
    return ax;
}

/// Probability vector: within 1e-9 of total 1 (rescaled exactly when off by more than 1e-12).
inline DiscreteMeasure probability_from(const json& j, std::size_t n, const std::string& path) {
    const json& v = require(j, "fixed", path);
    std::vector<double> m = numbers(v, path + ".fixed");
    if (m.size() != n) throw InstanceError(path + ".fixed", "expected " + std::to_string(n) + " masses");
    for (double x : m) {
        if (x < 0.0) throw InstanceError(path + ".fixed", "negative mass");
    }
    double total = 0.0;
    for (double x : m) total += x;
    const bool normalize = j.contains("normalize") && j.at("normalize").is_boolean() && j.at("normalize").get<bool>();
    if (!normalize && std::abs(total - 1.0) > 1e-9) throw InstanceError(path + ".fixed", "marginal not probability");
    if (!(total > 0.0)) throw InstanceError(path + ".fixed", "marginal has zero mass");
    if (std::abs(total - 1.0) > DiscreteMeasure::kProbabilityTol) {
        for (double& x : m) x /= total;
    }
    try {
        return DiscreteMeasure::probability(std::move(m));
    } catch (const std::invalid_argument&) {
        throw InstanceError(path + ".fixed", "marginal not probability");
    }
}

}  // namespace detail

/// Build and validate an instance from a parsed JSON document.
inline ProblemInstance instance_from_json(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw InstanceError("", "instance must be a JSON object");
    const json& ver = require(doc, "version", "");
    if (!ver.is_number_integer() || ver.get<int>() != kFormatVersion) {
        throw InstanceError("version", "unsupported format version (expected 1)");
    }
    ProblemInstance inst;
    const json& kind = require(doc, "kind", "");
    if (!kind.is_string()) throw InstanceError("kind", "expected a string");
    inst.kind = kind_from(kind.get<std::string>(), "kind");

    const json& axes = require(doc, "axes", "");
    if (!axes.is_array() || axes.empty()) throw InstanceError("axes", "expected a nonempty array");
    std::vector<MarginalSpace> spaces;
    for (std::size_t t = 0; t < axes.size(); ++t) spaces.push_back(axis_from(axes[t], "axes[" + std::to_string(t) + "]"));
    inst.grid = build_product_grid(std::move(spaces));
    const GridShape& sh = inst.grid.shape();

    const json& margs = require(doc, "marginals", "");
    if (!margs.is_array() || margs.size() != sh.num_axes()) {
        throw InstanceError("marginals", "expected one marginal per axis");
    }
    for (std::size_t t = 0; t < margs.size(); ++t) {
        const std::string mp = "marginals[" + std::to_string(t) + "]";
        if (margs[t].contains("polytope")) {
            inst.marginals.emplace_back(
                PolytopeMarginal{constraints(margs[t].at("polytope"), nullptr, sh.axis_size(t), mp + ".polytope")});
        } else {
            inst.marginals.emplace_back(FixedMarginal{probability_from(margs[t], sh.axis_size(t), mp)});
        }
    }
    for (const char* key : {"cost", "capacity", "reference", "payoff"}) {
        if (!doc.contains(key)) continue;
        std::vector<double> block = kernel_block(doc.at(key), sh, key);
        if (std::string(key) == "cost") inst.cost = std::move(block);
        if (std::string(key) == "capacity") inst.capacity = std::move(block);
        if (std::string(key) == "reference") inst.reference = std::move(block);
        if (std::string(key) == "payoff") inst.payoff = std::move(block);
    }
    if (doc.contains("base")) {
        std::vector<double> b = kernel_block(doc.at("base"), sh, "base");
        for (double v : b) {
            if (v < 0.0) throw InstanceError("base", "negative mass");
        }
        inst.base = DiscreteMeasure(std::move(b));
    }
    if (doc.contains("coupling_constraints")) {
        inst.coupling_constraints = constraints(doc.at("coupling_constraints"), &sh, sh.size(), "coupling_constraints");
    }
    if (doc.contains("family")) {
        const json& f = doc.at("family");
        if (!f.is_string()) throw InstanceError("family", "expected a string");
        inst.family = family_from(f.get<std::string>(), "family");
    }
    if (doc.contains("options")) {
        const json& o = doc.at("options");
        if (o.contains("tol")) inst.tol = number(o.at("tol"), "options.tol");
        if (o.contains("max_iter")) {
            if (!o.at("max_iter").is_number_unsigned()) throw InstanceError("options.max_iter", "expected a count");
            inst.max_iter = o.at("max_iter").get<std::size_t>();
        }
    }
    try {
        inst.validate();
    } catch (const std::invalid_argument& e) {
        throw InstanceError("", e.what());
    }
    return inst;
}

inline ProblemInstance parse_instance_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InstanceError("", std::string("malformed JSON: ") + e.what());
    }
    return instance_from_json(doc);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ProblemInstance parse_instance(const std::string& path) { return parse_instance_text(read_file(path)); }

inline json instance_to_json(const ProblemInstance& inst) {
    using namespace detail;
    const GridShape& sh = inst.grid.shape();
    json doc;
    doc["version"] = kFormatVersion;
    doc["kind"] = to_string(inst.kind);
    json axes = json::array();
    for (const auto& ax : inst.grid.axes()) {
        json a;
        a["points"] = ax.points;
        if (ax.has_coords()) a["coords"] = ax.coords;
        if (!ax.psi.empty()) a["psi"] = ax.psi;
        axes.push_back(a);
    }
    doc["axes"] = axes;
    json margs = json::array();
    for (std::size_t t = 0; t < inst.num_axes(); ++t) {
        if (inst.is_fixed(t)) {
            margs.push_back({{"fixed", inst.fixed_marginal(t).mass()}});
        } else {
            margs.push_back({{"polytope", constraints_json(inst.polytope_marginal(t).constraints, nullptr)}});
        }
    }
    doc["marginals"] = margs;
    if (!inst.cost.empty()) doc["cost"] = dense_block(inst.cost, sh);
    if (!inst.capacity.empty()) doc["capacity"] = dense_block(inst.capacity, sh);
    if (!inst.reference.empty()) doc["reference"] = dense_block(inst.reference, sh);
    if (!inst.payoff.empty()) doc["payoff"] = dense_block(inst.payoff, sh);
    if (inst.base) doc["base"] = dense_block(inst.base->mass(), sh);
    if (!inst.coupling_constraints.empty()) doc["coupling_constraints"] = constraints_json(inst.coupling_constraints, &sh);
    if (inst.kind == ProblemKind::GenericDual) doc["family"] = family_text(inst.family);
    doc["options"] = {{"tol", inst.tol}, {"max_iter", inst.max_iter}};
    return doc;
}

inline std::string serialize_instance(const ProblemInstance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Reports

inline json ext_json(ExtReal v) {
    if (v.is_pos_inf()) return "+inf";
    if (v.is_neg_inf()) return "-inf";
    return v.value();
}

inline json finite_or_text(double v) { return ext_json(ExtReal(v)); }

inline json sparse_coupling(const Coupling& lambda, double cutoff = 1e-12) {
    json out = json::array();
    for (std::size_t f = 0; f < lambda.mass().size(); ++f) {
        if (lambda[f] < cutoff) continue;
        out.push_back({{"index", lambda.shape().multi(f)}, {"mass", lambda[f]}});
    }
    return out;
}

inline double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double r : v) m = std::max(m, r);
    return m;
}

inline json report_json(const ResidualReport& r) {
    json out;
    out["tol"] = r.tol;
    out["pass"] = r.pass;
    out["max"] = finite_or_text(r.max_residual());
    json marg = json::array();
    for (double v : r.marginal) marg.push_back(finite_or_text(v));
    out["marginal"] = marg;
    out["fenchel_max"] = finite_or_text(max_of(r.fenchel));
    out["domain_max"] = finite_or_text(max_of(r.domain));
    if (!r.martingale.empty()) out["martingale_max"] = finite_or_text(max_of(r.martingale));
    if (!r.labels.empty()) {
        json labels = json::array();
        for (SlackCase c : r.labels) labels.push_back(to_string(c));
        out["slackness_labels"] = labels;
        out["slackness_max"] = finite_or_text(max_of(r.slackness));
    }
    if (const auto w = r.worst_cell()) out["worst_cell"] = *w;
    return out;
}

inline json potentials_json(const Potentials& x) { return x.values; }

inline json strategy_json(const Strategy& z) { return {{"dim", z.dim}, {"values", z.z}}; }

inline json witness_json(const InfeasibilityWitness& w) {
    json out;
    out["message"] = w.message;
    out["ray"] = w.ray;
    out["ray_value"] = w.ray_value;
    out["x"] = potentials_json(w.x);
    if (w.z) out["z"] = strategy_json(*w.z);
    out["value"] = ext_json(w.value);
    return out;
}

inline json certificate_json(const Certificate& c) {
    json out;
    out["kind"] = to_string(c.kind);
    out["status"] = to_string(c.status);
    out["primal_value"] = ext_json(c.primal_value);
    out["dual_value"] = ext_json(c.dual_value);
    out["gap"] = ext_json(c.gap);
    out["iterations"] = c.iterations;
    out["x"] = potentials_json(c.x);
    if (c.z) out["z"] = strategy_json(*c.z);
    out["lambda"] = sparse_coupling(c.lambda);
    if (c.status != SolveStatus::Infeasible && c.status != SolveStatus::Unbounded) out["residuals"] = report_json(c.report);
    if (c.witness) out["witness"] = witness_json(*c.witness);
    out["notes"] = c.notes;
    return out;
}

inline json strassen_json(const StrassenResult& r) {
    json out;
    out["kind"] = "strassen";
    out["status"] = r.feasible ? "feasible" : "infeasible";
    out["iterations"] = r.iterations;
    if (r.feasible) {
        out["lambda"] = sparse_coupling(r.lambda);
        out["marginals"] = r.marginals;
    } else {
        out["witness"] = {{"x", potentials_json(r.witness)},
                          {"separation", ext_json(r.separation)},
                          {"ray", r.ray},
                          {"ray_value", r.ray_value}};
    }
    return out;
}

/// Potentials from a report or primal file: {"x": [[...], ...]}.
inline Potentials potentials_from_json(const json& doc, const GridShape& sh) {
    const json& xs = detail::require(doc, "x", "");
    if (!xs.is_array() || xs.size() != sh.num_axes()) throw InstanceError("x", "expected one vector per axis");
    Potentials x;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        x.values.push_back(detail::numbers(xs[t], "x[" + std::to_string(t) + "]"));
        if (x[t].size() != sh.axis_size(t)) throw InstanceError("x[" + std::to_string(t) + "]", "wrong length");
    }
    return x;
}

inline std::optional<Strategy> strategy_from_json(const json& doc, const GridShape& sh) {
    if (!doc.contains("z")) return std::nullopt;
    const json& z = doc.at("z");
    Strategy s;
    const json& dim = detail::require(z, "dim", "z");
    if (!dim.is_number_unsigned()) throw InstanceError("z.dim", "expected a count");
    s.dim = dim.get<std::size_t>();
    const json& vals = detail::require(z, "values", "z");
    if (!vals.is_array() || vals.size() + 1 != sh.num_axes()) throw InstanceError("z.values", "expected T vectors");
    for (std::size_t t = 0; t < vals.size(); ++t) {
        s.z.push_back(detail::numbers(vals[t], "z.values[" + std::to_string(t) + "]"));
        if (s.z[t].size() != sh.prefix_count(t) * s.dim) {
            throw InstanceError("z.values[" + std::to_string(t) + "]", "wrong length");
        }
    }
    return s;
}

/// Coupling from {"lambda": [{"index": [...], "mass": m}, ...]} or a dense nested array.
inline Coupling coupling_from_json(const json& doc, const GridShape& sh) {
    const json& lam = detail::require(doc, "lambda", "");
    std::vector<double> mass;
    if (lam.is_array() && (lam.empty() || lam[0].is_object())) {
        mass.assign(sh.size(), 0.0);
        for (std::size_t k = 0; k < lam.size(); ++k) {
            const std::string ep = "lambda[" + std::to_string(k) + "]";
            json entry = {{"index", detail::require(lam[k], "index", ep)},
                          {"value", detail::require(lam[k], "mass", ep)}};
            const std::vector<double> one = detail::kernel_block({{"default", 0.0}, {"entries", {entry}}}, sh, ep);
            for (std::size_t f = 0; f < sh.size(); ++f) mass[f] += one[f];
        }
    } else {
        mass = detail::kernel_block(lam, sh, "lambda");
    }
    for (double m : mass) {
        if (m < 0.0) throw InstanceError("lambda", "negative mass");
    }
    return Coupling(sh, std::move(mass));
}

}  // namespace otdual::io
