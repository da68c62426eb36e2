#include "ccuc/file_io.hpp"

#include "ccuc/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace ccuc {
namespace {

using nlohmann::json;

json parse_json(const std::string& text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(fmt::format("{}: malformed JSON: {}", what, e.what()));
    }
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw InputError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const json& v : j) {
        if (!v.is_number()) throw InputError(where + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw InputError(fmt::format("{}/{}: missing required field", where, key));
    return j.at(key);
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw InputError("failed writing " + path.string());
}

std::string gmms_to_json(std::span<const Gmm> gmms) {
    json arr = json::array();
    for (const Gmm& g : gmms) {
        json comps = json::array();
        for (const GaussianComponent& c : g.components()) {
            json cov = json::array();
            for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) {
                json row = json::array();
                for (Eigen::Index k = 0; k < c.covariance.cols(); ++k) row.push_back(c.covariance(r, k));
                cov.push_back(std::move(row));
            }
            comps.push_back({{"weight", c.weight},
                             {"mean", std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size())},
                             {"covariance", std::move(cov)}});
        }
        arr.push_back({{"dimension", g.dimension()}, {"components", std::move(comps)}});
    }
    return arr.dump(1) + "\n";
}

std::vector<Gmm> gmms_from_json(const std::string& text) {
    const json doc = parse_json(text, "GMM file");
    if (!doc.is_array() || doc.empty()) throw InputError("GMM file: expected a non-empty array of interval GMMs");
    std::vector<Gmm> out;
    for (std::size_t t = 0; t < doc.size(); ++t) {
        const std::string where = "/" + std::to_string(t);
        const json& jg = doc[t];
        const json& jd = field(jg, "dimension", where);
        if (!jd.is_number_integer() || jd.get<int>() < 1) throw InputError(where + "/dimension: expected a positive integer");
        const int d = jd.get<int>();
        const json& jc = field(jg, "components", where);
        if (!jc.is_array()) throw InputError(where + "/components: expected an array");
        std::vector<GaussianComponent> comps;
        for (std::size_t k = 0; k < jc.size(); ++k) {
            const std::string cw = where + "/components/" + std::to_string(k);
            GaussianComponent c;
            const json& w = field(jc[k], "weight", cw);
            if (!w.is_number()) throw InputError(cw + "/weight: expected a number");
            c.weight = w.get<double>();
            const std::vector<double> mean = numbers(field(jc[k], "mean", cw), cw + "/mean");
            if (static_cast<int>(mean.size()) != d) throw InputError(cw + "/mean: length differs from dimension");
            c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
            const json& cov = field(jc[k], "covariance", cw);
            if (!cov.is_array() || static_cast<int>(cov.size()) != d)
                throw InputError(cw + "/covariance: expected a dimension x dimension matrix");
            c.covariance.resize(d, d);
            for (int r = 0; r < d; ++r) {
                const std::vector<double> row = numbers(cov[static_cast<std::size_t>(r)], cw + "/covariance");
                if (static_cast<int>(row.size()) != d)
                    throw InputError(cw + "/covariance: expected a dimension x dimension matrix");
                for (int col = 0; col < d; ++col) c.covariance(r, col) = row[static_cast<std::size_t>(col)];
            }
            comps.push_back(std::move(c));
        }
        Gmm g(d, std::move(comps));
        require_valid(g, "GMM file interval " + std::to_string(t + 1));
        out.push_back(std::move(g));
    }
    return out;
}

void write_gmm_file(const std::filesystem::path& path, std::span<const Gmm> gmms) {
    write_text_file(path, gmms_to_json(gmms));
}

std::vector<Gmm> read_gmm_file(const std::filesystem::path& path) { return gmms_from_json(read_text_file(path)); }

std::string schedule_to_json(const std::string& case_name, const UcSchedule& s,
                             const std::optional<SolverSummary>& solver) {
    json gens = json::array();
    for (const GeneratorSchedule& g : s.generators)
        gens.push_back({{"id", g.id},
                        {"on", g.on},
                        {"power", g.power},
                        {"reserve_up", g.reserve_up},
                        {"reserve_down", g.reserve_down}});
    json wind = json::array();
    for (const WindSchedule& w : s.wind)
        wind.push_back({{"id", w.id}, {"scheduled", w.scheduled}, {"curtailed", w.curtailed}});
    json doc = {{"case", case_name},
                {"generators", std::move(gens)},
                {"wind", std::move(wind)},
                {"cost",
                 {{"commitment", s.cost.commitment},
                  {"fuel", s.cost.fuel},
                  {"reserve", s.cost.reserve},
                  {"curtailment", s.cost.curtailment},
                  {"total", s.cost.total}}}};
    if (solver)
        doc["solver"] = {{"status", solver->status},
                         {"objective", solver->objective},
                         {"best_bound", solver->best_bound},
                         {"gap", solver->gap},
                         {"nodes_explored", solver->nodes_explored}};
    return doc.dump(1) + "\n";
}

UcSchedule schedule_from_json(const std::string& text) {
    const json doc = parse_json(text, "schedule file");
    UcSchedule s;
    const json& gens = field(doc, "generators", "");
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const std::string where = "/generators/" + std::to_string(i);
        const json& g = gens[i];
        GeneratorSchedule gs;
        gs.id = field(g, "id", where).get<std::string>();
        for (double v : numbers(field(g, "on", where), where + "/on")) {
            if (v != 0.0 && v != 1.0) throw InputError(where + "/on: entries must be 0 or 1");
            gs.on.push_back(static_cast<int>(v));
        }
        gs.power = numbers(field(g, "power", where), where + "/power");
        gs.reserve_up = numbers(field(g, "reserve_up", where), where + "/reserve_up");
        gs.reserve_down = numbers(field(g, "reserve_down", where), where + "/reserve_down");
        if (gs.power.size() != gs.on.size() || gs.reserve_up.size() != gs.on.size() ||
            gs.reserve_down.size() != gs.on.size())
            throw InputError(where + ": series lengths differ");
        s.generators.push_back(std::move(gs));
    }
    const json& wind = field(doc, "wind", "");
    for (std::size_t j = 0; j < wind.size(); ++j) {
        const std::string where = "/wind/" + std::to_string(j);
        WindSchedule ws;
        ws.id = field(wind[j], "id", where).get<std::string>();
        ws.scheduled = numbers(field(wind[j], "scheduled", where), where + "/scheduled");
        ws.curtailed = numbers(field(wind[j], "curtailed", where), where + "/curtailed");
        if (ws.scheduled.size() != ws.curtailed.size()) throw InputError(where + ": series lengths differ");
        s.wind.push_back(std::move(ws));
    }
    const json& cost = field(doc, "cost", "");
    s.cost.commitment = field(cost, "commitment", "/cost").get<double>();
    s.cost.fuel = field(cost, "fuel", "/cost").get<double>();
    s.cost.reserve = field(cost, "reserve", "/cost").get<double>();
    s.cost.curtailment = field(cost, "curtailment", "/cost").get<double>();
    s.cost.total = field(cost, "total", "/cost").get<double>();
    return s;
}

std::string quantile_csv(const Case& c, const QuantileTable& q) {
    std::string out = "t,constraint,branch,level,quantile\n";
    for (int t = 0; t < q.horizon; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        out += fmt::format("{},reserve_up,,{},{}\n", t + 1, shortest(c.risk.alpha_reserve_up),
                           shortest(q.reserve_up[ti]));
        out += fmt::format("{},reserve_dn,,{},{}\n", t + 1, shortest(1.0 - c.risk.alpha_reserve_down),
                           shortest(q.reserve_down[ti]));
        for (std::size_t l = 0; l < c.network.branches.size(); ++l) {
            const Branch& b = c.network.branches[l];
            const auto li = static_cast<Eigen::Index>(l);
            out += fmt::format("{},line_fwd,{},{},{}\n", t + 1, b.id, shortest(1.0 - b.alpha_forward),
                               shortest(q.line_forward(li, t)));
            out += fmt::format("{},line_rev,{},{},{}\n", t + 1, b.id, shortest(b.alpha_reverse),
                               shortest(q.line_reverse(li, t)));
        }
    }
    return out;
}

}  // namespace ccuc
