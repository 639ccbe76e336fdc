// Thin bridge: structured values cross the boundary as JSON text and are
// decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mentor/config.hpp"
#include "mentor/dataset.hpp"
#include "mentor/evaluation.hpp"
#include "mentor/service.hpp"
#include "mentor/store.hpp"

namespace py = pybind11;
using namespace mentor;

namespace {

std::vector<Skill> skills_from(const std::string& text) {
    return json::parse(text).get<std::vector<Skill>>();
}

// Owns everything a TutorService borrows.
class Tutor {
public:
    explicit Tutor(const std::string& config_text)
        : config_(config_from_json(json::parse(config_text.empty() ? "{}" : config_text))),
          gateway_(config_.gateway),
          store_(config_.storage_dir) {
        configure_gateway(config_, gateway_);
        service_ = std::make_unique<TutorService>(gateway_, store_, make_search(config_), make_embedder(config_),
                                                  std::make_shared<RandomIds>(), config_.service);
    }

    std::pair<int, std::string> request(const std::string& method, const std::string& path, const std::string& body) {
        HttpReply reply;
        {
            py::gil_scoped_release release;
            reply = handle_request(*service_, method, path, body);
        }
        return {reply.status, reply.body.dump()};
    }

    std::string replay_profile(const std::string& learner_id) const {
        return json(service_->replay_profile(learner_id)).dump();
    }

private:
    AppConfig config_;
    Gateway gateway_;
    DocumentStore store_;
    std::unique_ptr<TutorService> service_;
};

}  // namespace

PYBIND11_MODULE(_mentor, m) {
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);
    py::register_exception<ConflictError>(m, "ConflictError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<GatewayError>(m, "GatewayError", PyExc_RuntimeError);

    m.def("normalize_skill_name", [](const std::string& s) { return normalize_skill_name(s); });
    m.def("word_count", [](const std::string& s) { return dataset::word_count(s); });
    m.def("target_mastery", [](const std::string& p) { return target_mastery(parse_proficiency(p)); });

    m.def("compute_gap", [](const std::string& required, const std::set<std::string>& mastered) {
        return json(compute_gap(skills_from(required), mastered)).dump();
    });
    m.def("match_skills", [](const std::string& predicted, const std::string& truth) {
        auto r = match_skills(skills_from(predicted), skills_from(truth));
        return py::make_tuple(r.recall, r.precision, r.matches);
    });
    m.def("pearson", [](const std::vector<double>& xs, const std::vector<double>& ys) {
        auto r = pearson(xs, ys);
        return py::make_tuple(r.r, r.p_value);
    });
    m.def("win_rates", [](const std::string& records_text) {
        auto records = json::parse(records_text).get<std::vector<PreferenceRecord>>();
        json out = json::object();
        for (auto kind : {ItemKind::Gap, ItemKind::Path, ItemKind::Content}) {
            auto t = tally(records, kind);
            json entry = {{"wins_a", t.wins_a}, {"wins_b", t.wins_b}, {"win_rate_a", nullptr}};
            if (t.win_rate_a) entry["win_rate_a"] = *t.win_rate_a;
            out[json(kind).get<std::string>()] = entry;
        }
        return out.dump();
    });

    py::class_<Tutor>(m, "Tutor")
        .def(py::init<const std::string&>(), py::arg("config") = "")
        .def("request", &Tutor::request, py::arg("method"), py::arg("path"), py::arg("body") = "")
        .def("replay_profile", &Tutor::replay_profile);
}
