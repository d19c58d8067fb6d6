#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "homocon/dilation.hpp"
#include "homocon/error.hpp"
#include "homocon/lmi.hpp"
#include "homocon/protocol.hpp"
#include "homocon/runner.hpp"
#include "homocon/scenario.hpp"
#include "homocon/simulation.hpp"

namespace py = pybind11;
using namespace homocon;

namespace {

py::dict certificate_dict(const CertificateP& c) {
    py::dict d;
    d["P"] = c.p;
    d["margin_pd"] = c.margin_pd;
    d["margin_monotone"] = c.margin_monotone;
    d["margin_decay"] = c.margin_decay;
    d["feasible"] = c.feasible;
    return d;
}

py::dict certificate_dict(const CertificateXY& c) {
    py::dict d;
    d["X"] = c.x;
    d["Y"] = Eigen::VectorXd(c.y.transpose());
    d["P"] = c.p;
    d["K"] = Eigen::VectorXd(c.k.transpose());
    d["margin_pd"] = c.margin_pd;
    d["margin_monotone"] = c.margin_monotone;
    d["margin_decay"] = c.margin_decay;
    d["feasible"] = c.feasible;
    return d;
}

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["name"] = s.name;
    d["settling_time"] = s.settling_time;
    py::list axes;
    for (const auto& a : s.axes) {
        py::dict ax;
        ax["axis"] = a.axis;
        ax["protocol"] = a.protocol;
        ax["mu"] = a.mu;
        ax["settling_time"] = a.settling_time;
        ax["overshoot"] = a.overshoot;
        ax["min_barrier"] = a.min_barrier;
        ax["violation_time"] = a.violation_time;
        ax["rho"] = a.rho;
        ax["theta"] = a.theta;
        ax["disturbance_bound"] = a.q_bound;
        axes.append(ax);
    }
    d["axes"] = axes;
    return d;
}

// Per-axis arrays shaped (samples, agents, n) and (samples, agents).
py::dict trajectory_dict(const Trajectory& traj) {
    py::dict out;
    out["t"] = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(traj.times().data(), traj.times().size()));
    const auto samples = static_cast<py::ssize_t>(traj.num_samples());
    const auto agents = static_cast<py::ssize_t>(traj.num_agents());
    const auto dim = static_cast<py::ssize_t>(traj.dim());
    auto to_array = [](const std::vector<double>& data, std::vector<py::ssize_t> shape) {
        py::array_t<double> arr(shape);
        std::copy(data.begin(), data.end(), arr.mutable_data());
        return arr;
    };
    py::dict axes;
    for (int a = 0; a < traj.num_axes(); ++a) {
        const auto& tr = traj.axis(a);
        py::dict ax;
        ax["x"] = to_array(tr.states, {samples, agents, dim});
        ax["e"] = to_array(tr.errors, {samples, agents, dim});
        ax["phi"] = to_array(tr.barriers, {samples, agents, dim});
        ax["u"] = to_array(tr.controls, {samples, agents});
        ax["hnorm"] = to_array(tr.hnorms, {samples, agents});
        ax["q"] = to_array(tr.disturbances, {samples, agents});
        axes[py::str(tr.name)] = ax;
    }
    out["axes"] = axes;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Homogeneous leader-follower consensus: gains, certificates and simulation";

    static py::handle error_type = py::exception<Error>(m, "HomoconError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            exc.attr("exit_code") = exit_code_for(e.code());
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.def("linear_gain", [](int n, double lambda) { return Eigen::VectorXd(linear_gain(n, lambda).transpose()); },
          py::arg("n"), py::arg("lam") = 1.0);
    m.def("generator_weights", [](int n, double mu) { return DilationGenerator(n, mu).weights(); }, py::arg("n"),
          py::arg("mu"));
    m.def(
        "canonical_norm",
        [](const Mat& p, double mu, const Vec& x) {
            return canonical_norm(HomogeneousNormContext(DilationGenerator(static_cast<int>(x.size()), mu), p), x);
        },
        py::arg("P"), py::arg("mu"), py::arg("x"));
    m.def(
        "norm_gradient",
        [](const Mat& p, double mu, const Vec& x) {
            const HomogeneousNormContext ctx(DilationGenerator(static_cast<int>(x.size()), mu), p);
            return Eigen::VectorXd(norm_gradient(ctx, x).transpose());
        },
        py::arg("P"), py::arg("mu"), py::arg("x"));
    m.def(
        "verify_lmi_P",
        [](const Mat& p, double mu, double lambda) {
            const int n = static_cast<int>(p.rows());
            const IntegratorChain chain(n);
            return certificate_dict(verify_lmi_P(p, DilationGenerator(n, mu), chain.a, chain.b, linear_gain(n, lambda)));
        },
        py::arg("P"), py::arg("mu"), py::arg("lam") = 1.0);
    m.def(
        "verify_lmi_XY",
        [](const Mat& x, const Vec& y, double mu) {
            const int n = static_cast<int>(x.rows());
            const IntegratorChain chain(n);
            return certificate_dict(verify_lmi_XY(x, RowVec(y.transpose()), DilationGenerator(n, mu), chain.a, chain.b));
        },
        py::arg("X"), py::arg("Y"), py::arg("mu"));
    m.def(
        "solve_lmi_P",
        [](int n, double mu, double lambda) {
            const IntegratorChain chain(n);
            return certificate_dict(solve_lmi_P(DilationGenerator(n, mu), chain.a, chain.b, linear_gain(n, lambda)));
        },
        py::arg("n"), py::arg("mu"), py::arg("lam") = 1.0);
    m.def(
        "solve_lmi_XY",
        [](int n, double mu) {
            const IntegratorChain chain(n);
            return certificate_dict(solve_lmi_XY(DilationGenerator(n, mu), chain.a, chain.b));
        },
        py::arg("n"), py::arg("mu"));

    m.def(
        "simulate",
        [](const std::string& json_text) {
            const auto doc = parse_scenario(json_text);
            const auto cfg = build_scenario(doc);
            Trajectory traj = [&] {
                py::gil_scoped_release release;
                return simulate(cfg);
            }();
            py::dict out = trajectory_dict(traj);
            out["summary"] = summary_dict(summarize(doc.name, cfg, traj));
            return out;
        },
        py::arg("scenario_json"), "Simulate a scenario given as JSON text.");
    m.def(
        "run_scenario",
        [](const std::filesystem::path& config, const std::filesystem::path& outdir) {
            const auto doc = load_scenario_file(config);
            RunSummary s;
            {
                py::gil_scoped_release release;
                s = run_to_files(doc, outdir);
            }
            return summary_dict(s);
        },
        py::arg("config"), py::arg("outdir"));
    m.def(
        "run_presets",
        [](const std::filesystem::path& outdir, std::optional<std::uint64_t> seed, std::optional<double> dt,
           std::optional<double> horizon, int threads) {
            std::vector<RunSummary> runs;
            {
                py::gil_scoped_release release;
                runs = run_presets(outdir, {seed, dt, horizon}, threads > 0 ? threads : thread_budget());
            }
            py::list out;
            for (const auto& r : runs) out.append(summary_dict(r));
            return out;
        },
        py::arg("outdir"), py::arg("seed") = py::none(), py::arg("dt") = py::none(), py::arg("horizon") = py::none(),
        py::arg("threads") = 0);
    m.def("preset_scenario_json", [](int index) {
        const auto runs = preset_runs();
        if (index < 0 || index >= static_cast<int>(runs.size())) throw py::index_error("preset index out of range");
        return scenario_to_json(preset_scenario(runs[index]));
    });
}
