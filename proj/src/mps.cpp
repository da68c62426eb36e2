#include "ccuc/errors.hpp"
#include "ccuc/miqp.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace ccuc {
namespace {

// Shortest representation that parses back to the same double.
std::string number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

char row_type(Sense s) {
    switch (s) {
        case Sense::less_equal: return 'L';
        case Sense::equal: return 'E';
        case Sense::greater_equal: return 'G';
    }
    return 'N';
}

constexpr std::string_view kObjective = "OBJ";

}  // namespace

std::string to_mps(const MiqpModel& model, std::string_view name) {
    if (const auto problems = model.check(); !problems.empty()) throw InputError("MPS export: " + problems.front());
    const auto& vars = model.variables();
    const auto& rows = model.constraints();
    const auto& obj = model.objective();

    std::vector<std::vector<std::pair<std::size_t, double>>> by_column(vars.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (const Term& t : rows[r].terms) by_column[static_cast<std::size_t>(t.var)].push_back({r, t.coef});

    std::string out;
    out += fmt::format("NAME {}\nROWS\n N  {}\n", name, kObjective);
    for (const LinearConstraint& row : rows) out += fmt::format(" {}  {}\n", row_type(row.sense), row.name);

    out += "COLUMNS\n";
    bool in_integer = false;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const bool integer = vars[i].kind == VarKind::binary;
        if (integer != in_integer) {
            out += fmt::format("    MARKER  'MARKER'  '{}'\n", integer ? "INTORG" : "INTEND");
            in_integer = integer;
        }
        const std::string& col = vars[i].name;
        if (obj.linear[i] != 0.0 || by_column[i].empty())
            out += fmt::format("    {}  {}  {}\n", col, kObjective, number(obj.linear[i]));
        for (const auto& [r, coef] : by_column[i]) out += fmt::format("    {}  {}  {}\n", col, rows[r].name, number(coef));
    }
    if (in_integer) out += "    MARKER  'MARKER'  'INTEND'\n";

    out += "RHS\n";
    if (obj.constant != 0.0) out += fmt::format("    RHS  {}  {}\n", kObjective, number(-obj.constant));
    for (const LinearConstraint& row : rows)
        if (row.rhs != 0.0) out += fmt::format("    RHS  {}  {}\n", row.name, number(row.rhs));

    out += "BOUNDS\n";
    for (const Variable& v : vars) {
        if (v.lower == v.upper) {
            out += fmt::format(" FX BND  {}  {}\n", v.name, number(v.lower));
            continue;
        }
        if (v.kind == VarKind::binary && v.lower == 0.0 && v.upper == 1.0) {
            out += fmt::format(" BV BND  {}\n", v.name);
            continue;
        }
        if (std::isinf(v.lower) && std::isinf(v.upper)) {
            out += fmt::format(" FR BND  {}\n", v.name);
            continue;
        }
        if (std::isinf(v.lower))
            out += fmt::format(" MI BND  {}\n", v.name);
        else if (v.lower != 0.0)
            out += fmt::format(" LO BND  {}  {}\n", v.name, number(v.lower));
        if (std::isfinite(v.upper)) out += fmt::format(" UP BND  {}  {}\n", v.name, number(v.upper));
    }

    bool quadratic = false;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (obj.quadratic[i] == 0.0) continue;
        if (!quadratic) out += "QUADOBJ\n";
        quadratic = true;
        out += fmt::format("    {}  {}  {}\n", vars[i].name, vars[i].name, number(2.0 * obj.quadratic[i]));
    }
    out += "ENDATA\n";
    return out;
}

void write_mps(const MiqpModel& model, const std::filesystem::path& path, std::string_view name) {
    const std::string text = to_mps(model, name);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw InputError("failed writing " + path.string());
}

MiqpModel parse_mps(const std::string& text) {
    enum class Section { none, rows, columns, rhs, bounds, quadobj, done };
    Section section = Section::none;
    std::string objective_row;
    struct Row {
        std::string name;
        Sense sense;
        std::vector<Term> terms;
        double rhs = 0.0;
    };
    std::vector<Row> rows;
    std::unordered_map<std::string, std::size_t> row_index;
    MiqpModel model;
    std::unordered_map<std::string, int> col_index;
    bool integer = false;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) { throw InputError(fmt::format("MPS line {}: {}", line_no, what)); };
    auto parse_number = [&](const std::string& s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad number '" + s + "'");
        return v;
    };
    auto column = [&](const std::string& n) {
        const auto it = col_index.find(n);
        if (it == col_index.end()) fail("unknown column " + n);
        return it->second;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '*') continue;
        std::istringstream ls(line);
        std::vector<std::string> f;
        for (std::string tok; ls >> tok;) f.push_back(tok);
        if (f.empty()) continue;
        if (line[0] != ' ') {
            if (f[0] == "NAME") section = Section::none;
            else if (f[0] == "ROWS") section = Section::rows;
            else if (f[0] == "COLUMNS") section = Section::columns;
            else if (f[0] == "RHS") section = Section::rhs;
            else if (f[0] == "BOUNDS") section = Section::bounds;
            else if (f[0] == "QUADOBJ") section = Section::quadobj;
            else if (f[0] == "ENDATA") section = Section::done;
            else fail("unknown section " + f[0]);
            continue;
        }
        switch (section) {
            case Section::rows: {
                if (f.size() != 2) fail("expected row type and name");
                if (f[0] == "N") {
                    if (!objective_row.empty()) fail("multiple objective rows");
                    objective_row = f[1];
                    break;
                }
                Sense s;
                if (f[0] == "L") s = Sense::less_equal;
                else if (f[0] == "G") s = Sense::greater_equal;
                else if (f[0] == "E") s = Sense::equal;
                else fail("unknown row type " + f[0]);
                if (!row_index.emplace(f[1], rows.size()).second) fail("duplicate row " + f[1]);
                rows.push_back({f[1], s, {}, 0.0});
                break;
            }
            case Section::columns: {
                if (f.size() == 3 && f[1] == "'MARKER'") {
                    if (f[2] == "'INTORG'") integer = true;
                    else if (f[2] == "'INTEND'") integer = false;
                    else fail("unknown marker " + f[2]);
                    break;
                }
                if (f.size() != 3 && f.size() != 5) fail("expected column, row, value");
                auto it = col_index.find(f[0]);
                if (it == col_index.end()) {
                    const int idx = integer ? model.add_variable(f[0], VarKind::binary, 0.0, 1.0)
                                            : model.add_variable(f[0], VarKind::continuous, 0.0, kInfinity);
                    it = col_index.emplace(f[0], idx).first;
                }
                for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
                    const double v = parse_number(f[k + 1]);
                    if (f[k] == objective_row) {
                        model.objective().linear[static_cast<std::size_t>(it->second)] += v;
                        continue;
                    }
                    const auto r = row_index.find(f[k]);
                    if (r == row_index.end()) fail("unknown row " + f[k]);
                    rows[r->second].terms.push_back({it->second, v});
                }
                break;
            }
            case Section::rhs: {
                if (f.size() != 3 && f.size() != 5) fail("expected set, row, value");
                for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
                    const double v = parse_number(f[k + 1]);
                    if (f[k] == objective_row) {
                        model.objective().constant = -v;
                        continue;
                    }
                    const auto r = row_index.find(f[k]);
                    if (r == row_index.end()) fail("unknown row " + f[k]);
                    rows[r->second].rhs = v;
                }
                break;
            }
            case Section::bounds: {
                if (f.size() < 3) fail("expected bound type, set, column");
                Variable& v = model.variable(column(f[2]));
                const std::string& type = f[0];
                auto value = [&] {
                    if (f.size() != 4) fail(type + " bound needs a value");
                    return parse_number(f[3]);
                };
                if (type == "UP") v.upper = value();
                else if (type == "LO") v.lower = value();
                else if (type == "FX") v.lower = v.upper = value();
                else if (type == "FR") v.lower = -kInfinity, v.upper = kInfinity;
                else if (type == "MI") v.lower = -kInfinity;
                else if (type == "PL") v.upper = kInfinity;
                else if (type == "BV") v.kind = VarKind::binary, v.lower = 0.0, v.upper = 1.0;
                else fail("unknown bound type " + type);
                break;
            }
            case Section::quadobj: {
                if (f.size() != 3) fail("expected column, column, value");
                if (f[0] != f[1]) fail("off-diagonal quadratic term " + f[0] + " x " + f[1]);
                model.objective().quadratic[static_cast<std::size_t>(column(f[0]))] += 0.5 * parse_number(f[2]);
                break;
            }
            default: fail("data outside a section");
        }
    }
    if (section != Section::done) throw InputError("MPS: missing ENDATA");
    for (Row& r : rows) model.add_constraint(std::move(r.name), std::move(r.terms), r.sense, r.rhs);
    if (const auto problems = model.check(); !problems.empty()) throw InputError("MPS: " + problems.front());
    return model;
}

}  // namespace ccuc
