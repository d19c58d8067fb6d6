// Command-line front end: gains, verify-lmi, simulate, reproduce-paper.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "homocon/runner.hpp"

namespace hc = homocon;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <class V>
std::string fmt_vec(const V& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v(i));
    return out + "]";
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "none"; }

int cmd_gains(int n, double lambda, std::optional<double> mu) {
    const hc::IntegratorChain chain(n);
    const hc::RowVec k = hc::linear_gain(n, lambda);
    std::cout << "K_lin = " << fmt_vec(k) << "\n";
    if (mu) {
        const hc::DilationGenerator gen(n, *mu);
        std::cout << "G_d = diag" << fmt_vec(gen.weights()) << "\n";
    }
    const Eigen::MatrixXd a_cl = chain.a - chain.b * k;
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(a_cl).eigenvalues();
    std::cout << "closed-loop eigenvalues =";
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        std::cout << ' ' << fmt(eig(i).real());
        if (std::abs(eig(i).imag()) > 0.0) std::cout << (eig(i).imag() < 0 ? "-" : "+") << fmt(std::abs(eig(i).imag())) << 'i';
    }
    std::cout << "\n";
    return 0;
}

int cmd_verify(const std::string& config) {
    const auto doc = hc::load_scenario_file(config);
    const auto checks = hc::verify_certificates(doc);
    if (checks.empty()) throw hc::Error(hc::ErrorCode::ConfigError, "no certificate matrices in the config");
    bool ok = true;
    for (const auto& c : checks) {
        if (c.p) {
            std::cout << c.axis << " P: pd=" << fmt(c.p->margin_pd) << " monotone=" << fmt(c.p->margin_monotone)
                      << " decay=" << fmt(c.p->margin_decay) << (c.p->feasible ? " feasible" : " infeasible") << "\n";
        }
        if (c.xy) {
            std::cout << c.axis << " X,Y: pd=" << fmt(c.xy->margin_pd) << " monotone=" << fmt(c.xy->margin_monotone)
                      << " decay=" << fmt(c.xy->margin_decay) << (c.xy->feasible ? " feasible" : " infeasible");
            if (c.xy->feasible) std::cout << " K=" << fmt_vec(c.xy->k);
            std::cout << "\n";
        }
        ok = ok && c.feasible();
    }
    return ok ? 0 : 3;
}

void print_summary(const hc::RunSummary& s) {
    std::cout << s.name << ": settling_time=" << fmt_opt(s.settling_time);
    for (const auto& a : s.axes) {
        std::cout << " | " << a.axis << " overshoot=" << fmt(a.overshoot) << " min_barrier=" << fmt(a.min_barrier)
                  << " violation_time=" << fmt_opt(a.violation_time);
        if (a.rho) std::cout << " rho=" << fmt(*a.rho) << " theta=" << fmt(*a.theta);
        if (a.q_bound) std::cout << " q_bound=" << fmt(*a.q_bound);
    }
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homogeneous leader-following consensus toolkit"};
    app.require_subcommand(1);

    int n = 2;
    double lambda = 1.0;
    std::optional<double> mu;
    auto* gains = app.add_subcommand("gains", "Print K_lin, the dilation generator and closed-loop eigenvalues");
    gains->add_option("--n", n, "State dimension")->required()->check(CLI::Range(1, hc::kMaxDim));
    gains->add_option("--lambda", lambda, "Closed-loop pole location (-lambda)")->check(CLI::PositiveNumber);
    gains->add_option("--mu", mu, "Homogeneity degree");

    std::string config;
    auto* verify = app.add_subcommand("verify-lmi", "Check the certificate matrices in a scenario file");
    verify->add_option("--config", config, "Scenario JSON")->required();

    std::string output = ".";
    hc::RunOverrides overrides;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--output", output, "Output directory");
        sub->add_option("--seed", overrides.seed, "Disturbance seed");
        sub->add_option("--dt", overrides.dt, "Step size [s]");
        sub->add_option("--horizon", overrides.horizon, "Horizon [s]");
    };
    auto* simulate = app.add_subcommand("simulate", "Run one scenario and write its CSVs");
    simulate->add_option("--config", config, "Scenario JSON")->required();
    add_run_flags(simulate);
    auto* reproduce = app.add_subcommand("reproduce-paper", "Run the four preset experiments");
    add_run_flags(reproduce);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gains) return cmd_gains(n, lambda, mu);
        if (*verify) return cmd_verify(config);
        if (*simulate) {
            auto doc = hc::load_scenario_file(config);
            hc::apply_overrides(doc, overrides);
            print_summary(hc::run_to_files(doc, output));
            return 0;
        }
        if (*reproduce) {
            const auto runs = hc::run_presets(output, overrides, hc::thread_budget());
            for (const auto& s : runs) print_summary(s);
            return 0;
        }
    } catch (const hc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hc::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
