#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qconf/classical_summation.hpp"
#include "qconf/hypergeom.hpp"
#include "qconf/lab.hpp"
#include "qconf/q_special.hpp"
#include "qconf/q_summation.hpp"

namespace py = pybind11;
using namespace qconf;

namespace {

std::vector<std::string> rationals(const std::vector<rational>& v) {
    std::vector<std::string> out;
    for (auto& r : v) out.push_back(r.str());
    return out;
}

sector_point point(const py::object& z) {
    if (py::isinstance<py::tuple>(z)) {
        auto t = z.cast<std::pair<double, double>>();
        return sector_point::from_polar(t.first, t.second);  // (modulus, argument) on the log surface
    }
    return sector_point::from_complex(z.cast<cplx>());
}

power_series formal(const linear_operator& op, int valuation, cplx leading, int order) {
    return solve_series(op, std::nullopt, valuation, leading, order).series;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Borel-Laplace and q-Borel-Laplace summation";

    // QconfError carries the diagnostic code as .code
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> exc_type;
    exc_type.call_once_and_store_result([&]() { return py::object(py::exception<error>(m, "QconfError")); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const error& e) {
            const py::object& type = exc_type.get_stored();
            py::object inst = type(std::string(e.code()) + ": " + e.what());
            inst.attr("code") = e.code();
            PyErr_SetObject(type.ptr(), inst.ptr());
        }
    });

    m.attr("version") = lab::version_string();

    py::enum_<q_mode>(m, "QMode")
        .value("discrete", q_mode::discrete)
        .value("theta", q_mode::theta)
        .value("continuous", q_mode::continuous);

    // special functions
    m.def("theta", [](cplx z, double q, bool product) { return theta(z, q, product ? eval_mode::product : eval_mode::series); },
          py::arg("z"), py::arg("q"), py::arg("product") = false);
    m.def("theta_ratio", &theta_ratio, py::arg("a"), py::arg("b"), py::arg("q"));
    m.def("eq_exp", [](cplx z, double q) { return eq_exp(z, q); }, py::arg("z"), py::arg("q"));
    m.def("pochhammer", &pochhammer, py::arg("a"), py::arg("p"), py::arg("n"));
    m.def("pochhammer_inf", &pochhammer_inf, py::arg("a"), py::arg("p"));

    // operators, given as the JSON text of an operator file
    m.def("newton_slopes", [](const std::string& text) {
        std::vector<std::pair<std::string, int>> out;
        for (auto& s : newton_polygon(parse_operator_text(text)).slopes) out.push_back({s.slope.str(), s.multiplicity});
        return out;
    });
    m.def("ladder", [](const std::string& text) {
        auto l = build_ladder(parse_operator_text(text));
        py::dict d;
        d["kappa_tilde"] = rationals(l.kappa_tilde);
        d["beta"] = l.beta;
        d["convergent"] = l.convergent();
        return d;
    });
    m.def("formal_solution",
          [](const std::string& text, int valuation, cplx leading, int order) {
              return formal(parse_operator_text(text), valuation, leading, order).coefficients;
          },
          py::arg("op"), py::arg("valuation") = 0, py::arg("leading") = cplx(1.0), py::arg("order") = 40);

    // sums at a list of points; a tuple (modulus, argument) picks the sheet
    m.def("multisum",
          [](const std::string& text, double d, const std::vector<py::object>& zs, int valuation, cplx leading, int order) {
              auto op = parse_operator_text(text);
              auto S = multisum(formal(op, valuation, leading, order), op, d);
              std::vector<cplx> out;
              for (auto& z : zs) out.push_back(S.evaluate(point(z)));
              return out;
          },
          py::arg("op"), py::arg("d"), py::arg("z"), py::arg("valuation") = 0, py::arg("leading") = cplx(1.0),
          py::arg("order") = 40);
    m.def("q_multisum",
          [](const std::string& text, double d, q_mode mode, const std::vector<py::object>& zs, int valuation, cplx leading,
             int order) {
              auto op = parse_operator_text(text);
              auto S = q_multisum(formal(op, valuation, leading, order), op, d, mode);
              std::vector<cplx> out;
              for (auto& z : zs) out.push_back(S.evaluate(point(z)));
              return out;
          },
          py::arg("op"), py::arg("d"), py::arg("mode"), py::arg("z"), py::arg("valuation") = 0,
          py::arg("leading") = cplx(1.0), py::arg("order") = 60);

    // hypergeometric
    m.def("rphi", [](std::vector<cplx> a, std::vector<cplx> b, double p, int n) { return rphi({a, b, p}, n).coefficients; });
    m.def("rphi_value", [](std::vector<cplx> a, std::vector<cplx> b, double p, cplx z) { return rphi_value({a, b, p}, z); });
    m.def("connection_infinity",
          [](std::vector<cplx> a, std::vector<cplx> b, double p, cplx z) { return connection_infinity({a, b, p}, z); });
    m.def("qsum_closed_form", [](std::vector<cplx> a, std::vector<cplx> b, double p, double d, cplx z) {
        return qsum_closed_form({a, b, p}, d, z);
    });
    m.def("classical_limit_rhs",
          [](std::vector<cplx> alpha, std::vector<cplx> beta, double d, cplx z) { return classical_limit_rhs({alpha, beta}, d, z); });

    // the experiment runner: returns (csv, metadata json, verdict)
    m.def("run",
          [](const std::string& command, const std::vector<std::string>& ops, double direction,
             const std::vector<std::string>& z, const std::vector<double>& q_grid, const std::string& mode, int order) {
              lab::experiment_config c;
              c.command = command;
              c.op_paths = ops;
              c.direction = direction;
              for (auto& s : z) c.z.push_back(lab::parse_sector_point(s));
              c.q_grid = q_grid;
              c.mode = parse_q_mode(mode);
              c.order = order;
              lab::result_table t;
              {
                  py::gil_scoped_release release;
                  t = lab::run(c);
              }
              return py::make_tuple(t.to_csv(), t.metadata.dump(), t.verdict);
          },
          py::arg("command"), py::arg("ops"), py::arg("direction") = 0.0, py::arg("z") = std::vector<std::string>{},
          py::arg("q_grid") = std::vector<double>{}, py::arg("mode") = "discrete", py::arg("order") = 60);
}
