#include "ccuc/errors.hpp"
#include "ccuc/grid.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ccuc {

namespace {

using nlohmann::json;

// JSON access with pointer-style locations in every error message.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    Node operator[](const std::string& key) const {
        if (!j_.is_object()) fail("expected an object");
        const auto it = j_.find(key);
        if (it == j_.end()) throw InputError(path_ + "/" + key + ": missing required field");
        return Node(*it, path_ + "/" + key);
    }

    Node operator[](std::size_t i) const { return Node(j_.at(i), path_ + "/" + std::to_string(i)); }

    std::size_t size() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }

    double number() const {
        if (!j_.is_number()) fail("expected a number");
        const double v = j_.get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    int integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<int>();
    }

    bool boolean() const {
        if (!j_.is_boolean()) fail("expected true or false");
        return j_.get<bool>();
    }

    std::string string() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    std::vector<double> numbers() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i].number();
        return out;
    }

    Eigen::MatrixXd matrix() const {
        const std::size_t rows = size();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
        for (std::size_t r = 0; r < rows; ++r) {
            const auto row = (*this)[r].numbers();
            if (row.size() != rows) (*this)[r].fail("expected a square matrix");
            for (std::size_t c = 0; c < rows; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        return m;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw InputError(path_ + ": " + msg); }

private:
    const json& j_;
    std::string path_;
};

double number_or(const Node& n, const std::string& key, double fallback) {
    return n.has(key) ? n[key].number() : fallback;
}

std::pair<int, int> index_pair(const Node& n) {
    if (n.size() != 2) n.fail("expected a pair of farm indices");
    return {n[0].integer(), n[1].integer()};
}

MarginalHistogram read_histogram(const Node& n) {
    try {
        return MarginalHistogram(n["bin_edges"].numbers(), n["bin_probabilities"].numbers());
    } catch (const InputError& e) {
        if (std::string(e.what()).rfind("histogram:", 0) == 0) n.fail(e.what());
        throw;
    }
}

Case read_case(const json& root, const std::filesystem::path& base_dir) {
    const Node doc(root, "");
    Case c;
    c.name = doc.has("name") ? doc["name"].string() : std::string("case");
    c.horizon = doc["horizon"].integer();

    const Node net = doc["network"];
    c.network.base_mva = net["base_mva"].number();
    const Node buses = net["buses"];
    for (std::size_t i = 0; i < buses.size(); ++i) c.network.bus_ids.push_back(buses[i].integer());
    c.network.slack_bus = net["slack_bus"].integer();

    const Node risk = doc["risk"];
    c.risk.alpha_reserve_up = risk["alpha_reserve_up"].number();
    c.risk.alpha_reserve_down = risk["alpha_reserve_down"].number();
    c.risk.alpha_line = risk["alpha_line"].number();
    c.risk.reserve_up_extra = risk["reserve_up_extra"].number();
    c.risk.reserve_down_extra = risk["reserve_down_extra"].number();
    c.risk.curtailment_penalty = risk["curtailment_penalty"].number();

    const Node branches = net["branches"];
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const Node b = branches[i];
        Branch br;
        br.id = b["id"].string();
        br.from_bus = b["from"].integer();
        br.to_bus = b["to"].integer();
        br.reactance = b["reactance"].number();
        br.capacity = b["capacity"].number();
        br.alpha_forward = number_or(b, "alpha_forward", c.risk.alpha_line);
        br.alpha_reverse = number_or(b, "alpha_reverse", c.risk.alpha_line);
        c.network.branches.push_back(std::move(br));
    }

    const Node gens = doc["generators"];
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const Node g = gens[i];
        Generator gen;
        gen.id = g["id"].string();
        gen.bus = g["bus"].integer();
        gen.p_max = g["p_max"].number();
        gen.p_min = g["p_min"].number();
        gen.a = g["a"].number();
        gen.b = g["b"].number();
        gen.c = g["c"].number();
        gen.startup_cost = g["startup_cost"].number();
        gen.shutdown_cost = g["shutdown_cost"].number();
        gen.reserve_up_cost = g["reserve_up_cost"].number();
        gen.reserve_down_cost = g["reserve_down_cost"].number();
        gen.reserve_up_max = g["reserve_up_max"].number();
        gen.reserve_down_max = g["reserve_down_max"].number();
        gen.ramp_up = g["ramp_up"].number();
        gen.ramp_down = g["ramp_down"].number();
        gen.min_up = g["min_up"].integer();
        gen.min_down = g["min_down"].integer();
        const Node init = g["initial"];
        gen.initial.on = init["on"].boolean();
        gen.initial.power = init["power"].number();
        gen.initial.periods = init["periods"].integer();
        c.generators.push_back(std::move(gen));
    }

    const Node farms = doc["wind_farms"];
    for (std::size_t i = 0; i < farms.size(); ++i) {
        const Node w = farms[i];
        c.wind_farms.push_back({w["id"].string(), w["bus"].integer(), w["capacity"].number(), w["forecast"].numbers()});
    }

    const Node loads = doc["loads"];
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const Node l = loads[i];
        c.loads.push_back({l["id"].string(), l["bus"].integer(), l["demand"].numbers()});
    }

    const Node unc = doc["uncertainty"];
    if (!unc.has("profiles") && !unc.has("gmm_file"))
        unc.fail("needs either marginal 'profiles' or a 'gmm_file' reference");
    if (unc.has("profiles")) {
        const Node profiles = unc["profiles"];
        for (std::size_t p = 0; p < profiles.size(); ++p) {
            const Node prof = profiles[p];
            UncertaintyProfile up;
            const Node marg = prof["marginals"];
            for (std::size_t k = 0; k < marg.size(); ++k) up.marginals.push_back(read_histogram(marg[k]));
            up.correlation = prof["correlation"].matrix();
            c.uncertainty.profiles.push_back(std::move(up));
        }
        if (unc.has("interval_profile")) {
            const Node ip = unc["interval_profile"];
            for (std::size_t t = 0; t < ip.size(); ++t) c.uncertainty.interval_profile.push_back(ip[t].integer());
        } else {
            c.uncertainty.interval_profile.assign(static_cast<std::size_t>(std::max(c.horizon, 0)), 0);
        }
    }
    if (unc.has("gmm_file")) {
        std::filesystem::path p = unc["gmm_file"].string();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        c.uncertainty.gmm_file = p;
    }
    if (unc.has("correlation_sweep")) {
        const Node sw = unc["correlation_sweep"];
        CorrelationSweep sweep;
        const Node varied = sw["varied"];
        for (std::size_t i = 0; i < varied.size(); ++i) sweep.varied.push_back(index_pair(varied[i]));
        if (sw.has("zeroed")) {
            const Node zeroed = sw["zeroed"];
            for (std::size_t i = 0; i < zeroed.size(); ++i) sweep.zeroed.push_back(index_pair(zeroed[i]));
        }
        c.uncertainty.sweep = std::move(sweep);
    }
    return c;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

std::size_t Network::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < bus_ids.size(); ++i)
        if (bus_ids[i] == bus_id) return i;
    throw InputError("unknown bus " + std::to_string(bus_id));
}

Case parse_case(const std::string& text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("case file is not valid JSON: ") + e.what());
    }
    Case c = read_case(root, base_dir);
    validate_case(c);
    return c;
}

Case load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open case file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_case(buf.str(), path.parent_path());
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void validate_case(const Case& c) {
    auto fail = [](const std::string& where, const std::string& msg) { throw InputError(where + ": " + msg); };
    const auto T = c.horizon;
    if (T < 1) fail("/horizon", "must be >= 1");

    const Network& net = c.network;
    if (!(net.base_mva > 0.0)) fail("/network/base_mva", "must be positive");
    if (net.bus_ids.empty()) fail("/network/buses", "no buses");
    std::set<int> ids(net.bus_ids.begin(), net.bus_ids.end());
    if (ids.size() != net.bus_ids.size()) fail("/network/buses", "duplicate bus id");
    auto bus_ref = [&](int bus, const std::string& where) {
        if (!ids.count(bus)) fail(where, "dangling reference to bus " + std::to_string(bus));
    };
    bus_ref(net.slack_bus, "/network/slack_bus");

    auto alpha_ok = [](double a) { return a > 0.0 && a < 0.5; };
    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        const auto& b = net.branches[i];
        const std::string where = "/network/branches/" + std::to_string(i) + " (" + b.id + ")";
        bus_ref(b.from_bus, where + "/from");
        bus_ref(b.to_bus, where + "/to");
        if (b.from_bus == b.to_bus) fail(where, "branch connects a bus to itself");
        if (!(b.reactance > 0.0)) fail(where + "/reactance", "must be positive, got " + fmt(b.reactance));
        if (!(b.capacity > 0.0)) fail(where + "/capacity", "must be positive, got " + fmt(b.capacity));
        if (!alpha_ok(b.alpha_forward) || !alpha_ok(b.alpha_reverse))
            fail(where, "overload probabilities must lie in (0, 0.5)");
    }
    check_connected(net);

    if (c.generators.empty()) fail("/generators", "no generators");
    for (std::size_t i = 0; i < c.generators.size(); ++i) {
        const auto& g = c.generators[i];
        const std::string where = "/generators/" + std::to_string(i) + " (" + g.id + ")";
        bus_ref(g.bus, where + "/bus");
        if (g.p_min < 0.0) fail(where + "/p_min", "must be nonnegative");
        if (g.p_min > g.p_max)
            fail(where, "p_min exceeds p_max by " + fmt(g.p_min - g.p_max) + " MW");
        if (g.a < 0.0) fail(where + "/a", "quadratic cost must be nonnegative (convexity), got " + fmt(g.a));
        if (g.startup_cost < 0.0 || g.shutdown_cost < 0.0) fail(where, "startup/shutdown costs must be nonnegative");
        if (g.reserve_up_max < 0.0 || g.reserve_down_max < 0.0) fail(where, "reserve limits must be nonnegative");
        if (g.ramp_up < 0.0 || g.ramp_down < 0.0) fail(where, "ramp limits must be nonnegative");
        if (g.min_up < 1 || g.min_down < 1) fail(where, "minimum up/down times must be >= 1");
        if (g.initial.periods < 0) fail(where + "/initial/periods", "must be nonnegative");
        if (g.initial.on) {
            if (g.initial.power < g.p_min - 1e-9 || g.initial.power > g.p_max + 1e-9)
                fail(where + "/initial/power", "must lie within [p_min, p_max] for a unit that is on");
        } else if (g.initial.power != 0.0) {
            fail(where + "/initial/power", "must be 0 for a unit that is off");
        }
    }

    if (c.wind_farms.empty()) fail("/wind_farms", "at least one wind farm is required");
    for (std::size_t j = 0; j < c.wind_farms.size(); ++j) {
        const auto& w = c.wind_farms[j];
        const std::string where = "/wind_farms/" + std::to_string(j) + " (" + w.id + ")";
        bus_ref(w.bus, where + "/bus");
        if (static_cast<int>(w.forecast.size()) != T)
            fail(where + "/forecast", "expected " + std::to_string(T) + " values");
        for (std::size_t t = 0; t < w.forecast.size(); ++t) {
            if (w.forecast[t] < 0.0 || w.forecast[t] > w.capacity)
                fail(where + "/forecast/" + std::to_string(t), "must lie within [0, capacity]");
        }
    }
    for (std::size_t k = 0; k < c.loads.size(); ++k) {
        const auto& l = c.loads[k];
        const std::string where = "/loads/" + std::to_string(k) + " (" + l.id + ")";
        bus_ref(l.bus, where + "/bus");
        if (static_cast<int>(l.demand.size()) != T) fail(where + "/demand", "expected " + std::to_string(T) + " values");
        for (std::size_t t = 0; t < l.demand.size(); ++t)
            if (l.demand[t] < 0.0) fail(where + "/demand/" + std::to_string(t), "must be nonnegative");
    }

    const auto& r = c.risk;
    if (!alpha_ok(r.alpha_reserve_up) || !alpha_ok(r.alpha_reserve_down) || !alpha_ok(r.alpha_line))
        fail("/risk", "probabilities must lie in (0, 0.5)");
    if (r.reserve_up_extra < 0.0 || r.reserve_down_extra < 0.0) fail("/risk", "extra reserves must be nonnegative");
    if (r.curtailment_penalty < 0.0) fail("/risk/curtailment_penalty", "must be nonnegative");

    const auto& u = c.uncertainty;
    const auto nw = static_cast<Eigen::Index>(c.wind_farms.size());
    for (std::size_t p = 0; p < u.profiles.size(); ++p) {
        const std::string where = "/uncertainty/profiles/" + std::to_string(p);
        if (static_cast<Eigen::Index>(u.profiles[p].marginals.size()) != nw)
            fail(where + "/marginals", "expected one histogram per wind farm");
        if (u.profiles[p].correlation.rows() != nw) fail(where + "/correlation", "dimension must match wind farms");
        try {
            check_correlation(u.profiles[p].correlation);
        } catch (const InputError& e) {
            fail(where + "/correlation", e.what());
        }
    }
    if (u.has_marginals()) {
        if (static_cast<int>(u.interval_profile.size()) != T)
            fail("/uncertainty/interval_profile", "expected " + std::to_string(T) + " entries");
        for (std::size_t t = 0; t < u.interval_profile.size(); ++t) {
            const int p = u.interval_profile[t];
            if (p < 0 || static_cast<std::size_t>(p) >= u.profiles.size())
                fail("/uncertainty/interval_profile/" + std::to_string(t), "no such profile");
        }
    } else if (!u.gmm_file) {
        fail("/uncertainty", "needs either marginal profiles or a gmm_file reference");
    }
    if (u.sweep) {
        for (const auto& pairs : {u.sweep->varied, u.sweep->zeroed}) {
            for (const auto& [a, b] : pairs) {
                if (a < 0 || b < 0 || a >= nw || b >= nw || a == b)
                    fail("/uncertainty/correlation_sweep", "invalid farm pair");
            }
        }
    }
}

}  // namespace ccuc
