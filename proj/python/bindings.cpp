#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rov/harness.hpp"
#include "rov/json_mirror.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
json from_py(const py::object& o) { return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }

rov::Scenario scenario_arg(const py::object& s) {
    if (py::isinstance<py::str>(s)) return rov::resolve_scenario(s.cast<std::string>());
    return rov::scenario_from_json(from_py(s));
}

py::dict columns(const rov::RunLog& log) {
    std::vector<double> t, x, y, depth, yaw, u, w, r, yaw_est, depth_est, ntu, left, right, vertical;
    for (const auto& row : log.rows) {
        t.push_back(row.truth.t);
        x.push_back(row.truth.x);
        y.push_back(row.truth.y);
        depth.push_back(row.truth.depth);
        yaw.push_back(row.truth.yaw);
        u.push_back(row.truth.u);
        w.push_back(row.truth.w);
        r.push_back(row.truth.r);
        yaw_est.push_back(row.yaw_est);
        depth_est.push_back(row.depth_est);
        ntu.push_back(row.turbidity_ntu);
        left.push_back(row.duties.left);
        right.push_back(row.duties.right);
        vertical.push_back(row.duties.vertical);
    }
    py::dict d;
    d["t"] = t; d["x"] = x; d["y"] = y; d["depth"] = depth; d["yaw"] = yaw;
    d["u"] = u; d["w"] = w; d["r"] = r;
    d["yaw_est"] = yaw_est; d["depth_est"] = depth_est; d["turbidity_ntu"] = ntu;
    d["duty_left"] = left; d["duty_right"] = right; d["duty_vertical"] = vertical;
    return d;
}

}  // namespace

PYBIND11_MODULE(rovsim, m) {
    m.doc() = "ROV simulator core";

    py::register_exception<rov::ScenarioError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<rov::InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<rov::InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<rov::SimulationDiverged>(m, "SimulationDiverged", PyExc_RuntimeError);

    m.def("builtin_scenarios", &rov::builtin_scenario_names);
    m.def("scenario", [](const std::string& name) { return to_py(rov::scenario_to_json(rov::resolve_scenario(name))); },
          py::arg("name"), "Scenario document for a builtin name or JSON path.");

    m.def(
        "run",
        [](const py::object& s, std::optional<std::uint64_t> seed) {
            auto sc = scenario_arg(s);
            if (seed) sc.seed = sc.noise.seed = *seed;
            rov::RunLog log;
            {
                py::gil_scoped_release release;
                log = rov::run_scenario(sc);
            }
            return columns(log);
        },
        py::arg("scenario"), py::arg("seed") = py::none(),
        "Runs a scenario (name, path or dict); returns per-tick columns.");

    m.def(
        "run_csv",
        [](const py::object& s, std::optional<std::uint64_t> seed) {
            auto sc = scenario_arg(s);
            if (seed) sc.seed = sc.noise.seed = *seed;
            return rov::to_csv(rov::run_scenario(sc));
        },
        py::arg("scenario"), py::arg("seed") = py::none());

    m.def(
        "step_metrics",
        [](const py::object& s, const std::string& channel, double step_time, std::optional<double> band) {
            const auto ch = channel == "yaw" ? rov::StepChannel::yaw : rov::StepChannel::depth;
            if (channel != "yaw" && channel != "depth") throw rov::InvalidInput("channel must be 'yaw' or 'depth'");
            const auto mt = rov::compute_step_metrics(rov::run_scenario(scenario_arg(s)), ch, step_time, band);
            py::dict d;
            d["settling_time"] = mt.settling_time;
            d["overshoot_pct"] = mt.overshoot;
            d["sse"] = mt.sse;
            d["magnitude"] = mt.magnitude;
            return d;
        },
        py::arg("scenario"), py::arg("channel"), py::arg("step_time"), py::arg("band") = py::none());

    m.def("depth_from_pressure", &rov::depth_from_pressure, py::arg("pressure"), py::arg("density") = 1000.0,
          py::arg("gravity") = 9.81);

    m.def("crc16", [](const py::bytes& b) {
        const std::string s = b;
        return rov::proto::crc16_ccitt_false(
            std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    });

    m.def("encode", [](const py::object& msg) {
        const auto bytes = rov::proto::encode_frame(rov::json_mirror::message_from_json(from_py(msg)));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }, py::arg("message"), "Encodes a JSON-mirror message dict to a tether frame.");

    m.def("decode", [](const py::bytes& b) {
        const std::string s = b;
        const auto res = rov::proto::decode_stream(
            std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
        py::list out;
        for (const auto& msg : res.messages) out.append(to_py(rov::json_mirror::to_json(msg)));
        py::list errors;
        for (const auto& e : res.errors) errors.append(py::make_tuple(rov::proto::to_string(e.kind), e.offset));
        return py::make_tuple(out, errors);
    }, py::arg("data"), "Returns (messages, [(error_kind, offset), ...]).");

    py::class_<rov::Session>(m, "Session")
        .def(py::init([](const py::object& s) { return rov::Session(scenario_arg(s)); }),
             py::arg("scenario") = py::str("resurface_drift"))
        .def("send_command",
             [](rov::Session& self, const py::object& cmd) {
                 self.send_command(rov::json_mirror::command_from_json(from_py(cmd)));
             })
        .def("tick", [](rov::Session& self) {
            const auto rec = self.tick();
            py::dict d;
            d["telemetry"] = to_py(rov::json_mirror::to_json(rec.telemetry));
            py::list received;
            for (const auto& msg : rec.surface_received) received.append(to_py(rov::json_mirror::to_json(msg)));
            d["received"] = received;
            d["depth"] = rec.row.truth.depth;
            d["yaw"] = rec.row.truth.yaw;
            return d;
        })
        .def_property_readonly("time", &rov::Session::time)
        .def_property_readonly("alpha", &rov::Session::alpha);
}
