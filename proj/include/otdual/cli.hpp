#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otdual/certificate.hpp"
#include "otdual/certify.hpp"
#include "otdual/io.hpp"
#include "otdual/problem.hpp"
#include "otdual/solvers.hpp"

namespace otdual::cli {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kError = 1, kInfeasible = 2, kUsage = 64 };

namespace detail {

inline std::string num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(12) << v;
    return ss.str();
}

inline std::string num(ExtReal v) {
    if (!v.is_finite()) {
        std::ostringstream ss;
        ss << v;
        return ss.str();
    }
    return num(v.value());
}

inline std::string index_text(const MultiIndex& mi) {
    std::string s = "(";
    for (std::size_t t = 0; t < mi.size(); ++t) s += (t ? ", " : "") + std::to_string(mi[t]);
    return s + ")";
}

inline void print_vectors(std::ostream& out, const std::string& name, const std::vector<std::vector<double>>& vs) {
    for (std::size_t t = 0; t < vs.size(); ++t) {
        out << "  " << name << "_" << t << ":";
        for (double v : vs[t]) out << " " << num(v);
        out << "\n";
    }
}

inline void print_coupling(std::ostream& out, const Coupling& lambda) {
    out << "lambda (mass >= 1e-12):\n";
    for (std::size_t f = 0; f < lambda.mass().size(); ++f) {
        if (lambda[f] < 1e-12) continue;
        out << "  " << index_text(lambda.shape().multi(f)) << " " << num(lambda[f]) << "\n";
    }
}

inline void print_report(std::ostream& out, const ResidualReport& r) {
    out << "residuals: max " << num(r.max_residual()) << " at tol " << num(r.tol) << " -> "
        << (r.pass ? "pass" : "fail") << "\n";
    out << "  marginal:";
    for (double v : r.marginal) out << " " << num(v);
    out << "\n";
    out << "  fenchel max: " << num(io::max_of(r.fenchel)) << ", domain max: " << num(io::max_of(r.domain)) << "\n";
    if (!r.martingale.empty()) out << "  martingale max: " << num(io::max_of(r.martingale)) << "\n";
    if (!r.labels.empty()) {
        out << "  slackness:";
        for (SlackCase c : r.labels) out << " " << to_string(c);
        out << " (max residual " << num(io::max_of(r.slackness)) << ")\n";
    }
    if (const auto w = r.worst_cell(); w && !r.pass) out << "  worst cell: flat index " << *w << "\n";
}

inline void print_witness(std::ostream& out, const InfeasibilityWitness& w) {
    out << "witness: " << w.message << "\n";
    out << "  Farkas ray value: " << num(w.ray_value) << "\n";
    print_vectors(out, "x", w.x.values);
    if (w.z) print_vectors(out, "z", w.z->z);
    out << "  direction value: " << num(w.value) << "\n";
}

inline void print_certificate(std::ostream& out, const Certificate& c) {
    out << "kind: " << to_string(c.kind) << "\n";
    out << "status: " << to_string(c.status) << "\n";
    out << "primal value: " << num(c.primal_value) << "\n";
    out << "dual value: " << num(c.dual_value) << "\n";
    out << "gap: " << num(c.gap) << "\n";
    out << "iterations: " << c.iterations << "\n";
    for (const auto& n : c.notes) out << "note: " << n << "\n";
    if (c.witness) {
        print_witness(out, *c.witness);
        return;
    }
    print_report(out, c.report);
    print_coupling(out, c.lambda);
    out << "potentials:\n";
    print_vectors(out, "x", c.x.values);
    if (c.z) {
        out << "strategy:\n";
        print_vectors(out, "z", c.z->z);
    }
}

inline int status_code(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return kOk;
        case SolveStatus::Infeasible:
        case SolveStatus::Unbounded: return kInfeasible;
        case SolveStatus::NotConverged: return kError;
    }
    return kError;
}

struct Output {
    bool as_json = false;
    std::string out_path;

    void emit(std::ostream& out, const json& doc, const std::string& text) const {
        if (as_json) {
            out << doc.dump(2) << "\n";
        } else {
            out << text;
        }
        if (!out_path.empty()) {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + out_path);
            f << doc.dump(2) << "\n";
        }
    }
};

inline int emit_certificate(const Output& o, std::ostream& out, const Certificate& c) {
    std::ostringstream text;
    print_certificate(text, c);
    o.emit(out, io::certificate_json(c), text.str());
    return status_code(c.status);
}

inline int cmd_solve(const Output& o, std::ostream& out, const std::string& file) {
    return emit_certificate(o, out, solve(io::parse_instance(file)));
}

inline int cmd_schrodinger(const Output& o, std::ostream& out, const std::string& file, std::optional<double> tol,
                           std::optional<std::size_t> max_iter) {
    const ProblemInstance inst = io::parse_instance(file);
    if (inst.kind != ProblemKind::Schrodinger) throw UnsupportedProblem("schrodinger: instance kind is " + to_string(inst.kind));
    return emit_certificate(o, out, solve_schrodinger_ipf(inst, tol.value_or(inst.tol), max_iter.value_or(inst.max_iter)));
}

inline int cmd_verify(const Output& o, std::ostream& out, const std::string& file, const std::string& primal,
                      const std::string& dual, double tol) {
    const ProblemInstance inst = io::parse_instance(file);
    const json pdoc = json::parse(io::read_file(primal));
    const json ddoc = json::parse(io::read_file(dual));
    const Potentials x = io::potentials_from_json(pdoc, inst.shape());
    const std::optional<Strategy> z = io::strategy_from_json(pdoc, inst.shape());
    const Coupling lambda = io::coupling_from_json(ddoc, inst.shape());
    if (inst.kind == ProblemKind::Superhedge && !z) throw io::InstanceError("z", "superhedge verification needs a strategy");
    const Strategy* zp = z ? &*z : nullptr;
    ResidualReport r = verify_pointwise_optimality(inst, x, lambda, tol, zp);
    if (inst.kind == ProblemKind::Capacity) {
        const ResidualReport s = verify_capacity_slackness(inst, x, lambda, tol);
        r.labels = s.labels;
        r.slackness = s.slackness;
        r.finalize();
    }
    Certificate c;
    c.kind = inst.kind;
    c.x = x;
    c.z = z;
    c.lambda = lambda;
    c.set_values(primal_objective(inst, x, zp, 1e-9), dual_objective(inst, lambda, 1e-9));
    c.report = r;
    std::ostringstream text;
    print_certificate(text, c);
    text << "verdict: " << (r.pass ? "pass" : "fail") << "\n";
    json doc = io::certificate_json(c);
    doc.erase("status");
    doc["verdict"] = r.pass ? "pass" : "fail";
    o.emit(out, doc, text.str());
    return r.pass ? kOk : kError;
}

inline int cmd_check_order(const Output& o, std::ostream& out, const std::string& file) {
    const ProblemInstance inst = io::parse_instance(file);
    const bool ordered = check_convex_order(inst);
    json doc = {{"convex_order", ordered}};
    std::string text = std::string("convex order: ") + (ordered ? "yes" : "no") + "\n";
    const bool feasible = martingale_feasible(inst);
    doc["martingale_feasible"] = feasible;
    text += std::string("martingale coupling: ") + (feasible ? "exists" : "none") + "\n";
    o.emit(out, doc, text);
    return ordered ? kOk : kInfeasible;
}

inline int cmd_strassen(const Output& o, std::ostream& out, const std::string& file) {
    const ProblemInstance inst = io::parse_instance(file);
    const StrassenResult r = check_strassen(inst);
    std::ostringstream text;
    text << "strassen: " << (r.feasible ? "feasible" : "infeasible") << "\n";
    if (r.feasible) {
        print_coupling(text, r.lambda);
        text << "marginals:\n";
        print_vectors(text, "m", r.marginals);
    } else {
        text << "witness potentials:\n";
        print_vectors(text, "x", r.witness.values);
        text << "sum_t sigma_t(x_t) + sigma(-sum_t x_t) = " << num(r.separation) << "\n";
    }
    o.emit(out, io::strassen_json(r), text.str());
    return r.feasible ? kOk : kInfeasible;
}

inline int cmd_diagnose(const Output& o, std::ostream& out, const std::string& file) {
    const ProblemInstance inst = io::parse_instance(file);
    json doc;
    std::ostringstream text;
    doc["kind"] = to_string(inst.kind);
    text << "kind: " << to_string(inst.kind) << "\n";
    try {
        const bool rec = check_recession(inst);
        doc["recession"] = rec;
        text << "recession condition: " << (rec ? "holds" : "fails") << "\n";
    } catch (const UnsupportedProblem&) {
        doc["recession"] = "n/a";
        text << "recession condition: n/a\n";
    }
    const bool slater = check_slater(inst);
    doc["slater"] = slater;
    text << "slater condition: " << (slater ? "holds" : "fails") << "\n";
    const Certificate c = solve(inst);
    doc["status"] = to_string(c.status);
    doc["gap"] = io::ext_json(c.gap);
    text << "status: " << to_string(c.status) << ", gap " << num(c.gap) << "\n";
    if (c.status == SolveStatus::Optimal) {
        const Potentials canon = gauge_normalize(c.x);
        doc["x_canonical"] = canon.values;
        text << "canonical potentials:\n";
        print_vectors(text, "x", canon.values);
    }
    o.emit(out, doc, text.str());
    return kOk;
}

}  // namespace detail

/// Command-line entry point; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certified solvers for discrete transport duality problems", "otdual"};
    app.require_subcommand(1);
    detail::Output o;
    app.add_flag("--json", o.as_json, "Print the machine-readable JSON report");
    app.add_option("--out", o.out_path, "Also write the JSON report to this path");

    std::string file, primal, dual;
    double verify_tol = 1e-7;
    std::optional<double> ipf_tol;
    std::optional<std::size_t> ipf_iter;

    auto sub = [&](const char* name, const char* help) {
        CLI::App* s = app.add_subcommand(name, help);
        s->fallthrough();
        s->add_option("instance", file, "Instance file (JSON)")->required();
        return s;
    };
    CLI::App* solve_cmd = sub("solve", "Solve an instance and print its certificate");
    CLI::App* verify_cmd = sub("verify", "Check a primal/dual pair against the optimality conditions");
    verify_cmd->add_option("--primal", primal, "File with \"x\" (and \"z\" for superhedging)")->required();
    verify_cmd->add_option("--dual", dual, "File with \"lambda\"")->required();
    verify_cmd->add_option("--tol", verify_tol, "Residual tolerance");
    CLI::App* order_cmd = sub("check-order", "Test consecutive marginals for convex order");
    CLI::App* strassen_cmd = sub("strassen", "Decide whether Lambda has a coupling with marginals in Lambda_t");
    CLI::App* ipf_cmd = sub("schrodinger", "Run proportional fitting on an entropic instance");
    ipf_cmd->add_option("--tol", ipf_tol, "L1 marginal tolerance");
    ipf_cmd->add_option("--max-iter", ipf_iter, "Maximum number of full cycles");
    CLI::App* diag_cmd = sub("diagnose", "Recession and Slater checks plus canonical potentials");

    std::vector<std::string> argv_store{"otdual"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        if (solve_cmd->parsed()) return detail::cmd_solve(o, out, file);
        if (verify_cmd->parsed()) return detail::cmd_verify(o, out, file, primal, dual, verify_tol);
        if (order_cmd->parsed()) return detail::cmd_check_order(o, out, file);
        if (strassen_cmd->parsed()) return detail::cmd_strassen(o, out, file);
        if (ipf_cmd->parsed()) return detail::cmd_schrodinger(o, out, file, ipf_tol, ipf_iter);
        if (diag_cmd->parsed()) return detail::cmd_diagnose(o, out, file);
    } catch (const InfeasibleSupport& e) {
        err << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
    err << app.help();
    return kUsage;
}

}  // namespace otdual::cli
