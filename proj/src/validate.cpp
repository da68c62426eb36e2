#include "ccuc/validate.hpp"

#include "ccuc/errors.hpp"
#include "ccuc/gmm_fit.hpp"
#include "ccuc/random.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ccuc {

ViolationEstimate make_estimate(std::size_t violations, std::size_t n, double alpha) {
    ViolationEstimate e;
    e.alpha = alpha;
    if (n == 0) return e;
    e.probability = static_cast<double>(violations) / static_cast<double>(n);
    e.ci_halfwidth = 1.96 * std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(n));
    return e;
}

bool ValidationReport::all_within(double sigmas) const {
    auto ok = [&](const std::vector<ViolationEstimate>& v) {
        for (const auto& e : v)
            if (!e.within(sigmas)) return false;
        return true;
    };
    if (!ok(reserve_up) || !ok(reserve_down)) return false;
    for (std::size_t l = 0; l < line_forward.size(); ++l)
        if (!ok(line_forward[l]) || !ok(line_reverse[l])) return false;
    return true;
}

std::pair<double, std::string> ValidationReport::worst_excess() const {
    std::pair<double, std::string> worst{-kInfinity, ""};
    auto scan = [&](const std::vector<ViolationEstimate>& v, const std::string& label) {
        for (std::size_t t = 0; t < v.size(); ++t)
            if (v[t].probability - v[t].alpha > worst.first)
                worst = {v[t].probability - v[t].alpha, fmt::format("{} t{}", label, t + 1)};
    };
    scan(reserve_up, "reserve_up");
    scan(reserve_down, "reserve_dn");
    for (std::size_t l = 0; l < line_forward.size(); ++l) {
        scan(line_forward[l], "line_fwd " + branch_ids[l]);
        scan(line_reverse[l], "line_rev " + branch_ids[l]);
    }
    return worst;
}

ValidationReport validate_schedule(const Case& c, const PtdfMatrix& ptdf, const UcSchedule& s,
                                   std::span<const Gmm> gmms, std::size_t n_samples, std::uint64_t seed) {
    const int T = c.horizon;
    const std::size_t L = c.network.branches.size();
    const auto W = static_cast<int>(c.wind_farms.size());
    if (gmms.size() != static_cast<std::size_t>(T))
        throw InputError(fmt::format("validation: expected {} interval GMMs, got {}", T, gmms.size()));
    if (s.generators.size() != c.generators.size() || s.wind.size() != c.wind_farms.size())
        throw InputError("validation: schedule does not match the case units");
    for (const auto& g : s.generators)
        if (static_cast<int>(g.on.size()) != T) throw InputError("validation: schedule horizon mismatch for " + g.id);
    for (const auto& w : s.wind)
        if (static_cast<int>(w.scheduled.size()) != T) throw InputError("validation: schedule horizon mismatch for " + w.id);
    if (n_samples == 0) throw InputError("validation: sample count must be positive");

    ValidationReport r;
    r.sample_count = n_samples;
    r.seed = seed;
    for (const Branch& b : c.network.branches) r.branch_ids.push_back(b.id);
    r.line_forward.assign(L, {});
    r.line_reverse.assign(L, {});

    const Eigen::MatrixXd flows = nominal_flows(c, ptdf, s);
    Eigen::MatrixXd S(static_cast<Eigen::Index>(L), W);
    for (std::size_t l = 0; l < L; ++l) S.row(static_cast<Eigen::Index>(l)) = line_projection(c, ptdf, l).transpose();

    std::vector<double> e(static_cast<std::size_t>(W));
    for (int t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const Gmm& g = gmms[ti];
        if (g.dimension() != W)
            throw InputError(fmt::format("validation: interval {} GMM has dimension {}, case has {} wind farms", t + 1,
                                         g.dimension(), W));
        double ur = 0.0, dr = 0.0;
        for (const auto& gs : s.generators) {
            ur += gs.reserve_up[ti];
            dr += gs.reserve_down[ti];
        }

        GmmSampler sampler(g);
        RandomStream rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::size_t up = 0, dn = 0;
        std::vector<std::size_t> fwd(L, 0), rev(L, 0);
        const Eigen::Map<const Eigen::VectorXd> ev(e.data(), W);
        for (std::size_t k = 0; k < n_samples; ++k) {
            sampler.draw(rng, e);
            double total = 0.0;
            for (double v : e) total += v;
            up += ur < -total + c.risk.reserve_up_extra;
            dn += dr < total + c.risk.reserve_down_extra;
            for (std::size_t l = 0; l < L; ++l) {
                const auto li = static_cast<Eigen::Index>(l);
                const double flow = flows(li, t) + S.row(li).dot(ev);
                const double cap = c.network.branches[l].capacity;
                fwd[l] += flow > cap;
                rev[l] += flow < -cap;
            }
        }
        r.reserve_up.push_back(make_estimate(up, n_samples, c.risk.alpha_reserve_up));
        r.reserve_down.push_back(make_estimate(dn, n_samples, c.risk.alpha_reserve_down));
        for (std::size_t l = 0; l < L; ++l) {
            r.line_forward[l].push_back(make_estimate(fwd[l], n_samples, c.network.branches[l].alpha_forward));
            r.line_reverse[l].push_back(make_estimate(rev[l], n_samples, c.network.branches[l].alpha_reverse));
        }
    }
    return r;
}

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string report_csv(const ValidationReport& r) {
    std::string out = "t,constraint,branch,estimate,ci_halfwidth,alpha\n";
    auto row = [&](int t, std::string_view kind, std::string_view branch, const ViolationEstimate& e) {
        out += fmt::format("{},{},{},{},{},{}\n", t + 1, kind, branch, shortest(e.probability),
                           shortest(e.ci_halfwidth), shortest(e.alpha));
    };
    for (int t = 0; t < r.horizon(); ++t) {
        const auto ti = static_cast<std::size_t>(t);
        row(t, "reserve_up", "", r.reserve_up[ti]);
        row(t, "reserve_dn", "", r.reserve_down[ti]);
        for (std::size_t l = 0; l < r.branch_ids.size(); ++l) {
            row(t, "line_fwd", r.branch_ids[l], r.line_forward[l][ti]);
            row(t, "line_rev", r.branch_ids[l], r.line_reverse[l][ti]);
        }
    }
    return out;
}

void write_report_csv(const ValidationReport& r, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f << report_csv(r);
    if (!f) throw InputError("failed writing " + path.string());
}

ValidationReport parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,constraint,branch,estimate,ci_halfwidth,alpha")
        throw InputError("report CSV: unexpected header");
    ValidationReport r;
    std::map<std::string, std::size_t> branch_index;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() == 5 && line.back() == ',') f.emplace_back();
        if (f.size() != 6) throw InputError(fmt::format("report CSV line {}: expected 6 fields", line_no));
        const int t = std::stoi(f[0]) - 1;
        if (t < 0) throw InputError(fmt::format("report CSV line {}: bad interval", line_no));
        const ViolationEstimate e{std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
        auto put = [&](std::vector<ViolationEstimate>& v) {
            if (static_cast<int>(v.size()) != t)
                throw InputError(fmt::format("report CSV line {}: rows out of order", line_no));
            v.push_back(e);
        };
        if (f[1] == "reserve_up") {
            put(r.reserve_up);
        } else if (f[1] == "reserve_dn") {
            put(r.reserve_down);
        } else if (f[1] == "line_fwd" || f[1] == "line_rev") {
            auto it = branch_index.find(f[2]);
            if (it == branch_index.end()) {
                it = branch_index.emplace(f[2], r.branch_ids.size()).first;
                r.branch_ids.push_back(f[2]);
                r.line_forward.emplace_back();
                r.line_reverse.emplace_back();
            }
            put(f[1] == "line_fwd" ? r.line_forward[it->second] : r.line_reverse[it->second]);
        } else {
            throw InputError(fmt::format("report CSV line {}: unknown constraint {}", line_no, f[1]));
        }
    }
    return r;
}

}  // namespace ccuc
