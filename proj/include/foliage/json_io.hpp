#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "foliage/averaging.hpp"
#include "foliage/errors.hpp"
#include "foliage/expression.hpp"
#include "foliage/operator.hpp"
#include "foliage/pseudogroup.hpp"
#include "foliage/scenarios.hpp"

namespace foliage {

using json = nlohmann::json;

// --- boxes ------------------------------------------------------------

inline json box_to_json(const Box& b) {
    json j = json::array();
    for (const auto& iv : b.iv) j.push_back({iv.lo, iv.hi});
    return j;
}

inline Box box_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("box must be a nonempty array of [lo, hi]");
    Box b;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) throw ParseError("box interval must be [lo, hi]");
        b.iv.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    if (!b.valid()) throw ParseError("box intervals must satisfy lo < hi");
    return b;
}

// --- operators ---------------------------------------------------------
// Schema: {"q": int, "m": int, "coeffs": [{"s": [int,...], "re": "expr",
// "im": "expr" (optional)}]}; absent multi-indices are zero.

inline json operator_to_json(const BasicOperator& p) {
    json coeffs = json::array();
    for (const auto& t : p.terms()) {
        json c;
        c["s"] = t.s;
        c["re"] = to_string(t.re);
        if (!is_const_value(t.im, 0.0)) c["im"] = to_string(t.im);
        coeffs.push_back(c);
    }
    return json{{"q", p.q()}, {"m", p.m()}, {"coeffs", coeffs}};
}

inline BasicOperator operator_from_json(const json& j) {
    try {
        const int q = j.at("q").get<int>();
        const int m = j.at("m").get<int>();
        std::vector<OperatorTerm> terms;
        for (const auto& c : j.at("coeffs")) {
            OperatorTerm t;
            t.s = c.at("s").get<std::vector<int>>();
            t.re = parse_expression(c.at("re").get<std::string>());
            if (c.contains("im")) t.im = parse_expression(c.at("im").get<std::string>());
            terms.push_back(std::move(t));
        }
        return BasicOperator::make(q, m, std::move(terms));
    } catch (const json::exception& e) {
        throw ParseError(std::string("operator JSON: ") + e.what());
    }
}

// --- pseudogroups ----------------------------------------------------------
// Schema: {"q": int, "charts": [{"id", "box", "ambient"}], "generators":
// [{"src", "dst", "forward": ["expr",...], "inverse": [...], "dom": box,
// "dom_ext": box}]}. Codomain boxes are derived as interval images.

namespace detail {

inline LocalMap generator_map_from_parts(const Box& dom, const std::vector<Expression>& fwd,
                                         const std::vector<Expression>& inv,
                                         const std::string& src, const std::string& dst,
                                         const Box& ambient_fallback) {
    Box codom = ambient_fallback;
    if (const auto img = interval_image(fwd, dom)) {
        if (const auto clipped = intersect(*img, ambient_fallback))
            codom = *clipped;
        else
            codom = *img;
    }
    return LocalMap::make(dom, codom, fwd, inv, src, dst);
}

}  // namespace detail

inline json pseudogroup_to_json(const PseudogroupSpec& h) {
    json charts = json::array();
    for (const auto& c : h.charts)
        charts.push_back({{"id", c.id}, {"box", box_to_json(c.box)}, {"ambient", box_to_json(c.ambient)}});
    json gens = json::array();
    for (const auto& g : h.gens) {
        json fwd = json::array(), inv = json::array();
        for (const auto& e : g.map.fwd) fwd.push_back(to_string(e));
        for (const auto& e : g.map.inv) inv.push_back(to_string(e));
        gens.push_back({{"src", g.map.chart_src},
                        {"dst", g.map.chart_dst},
                        {"forward", fwd},
                        {"inverse", inv},
                        {"dom", box_to_json(g.map.dom)},
                        {"dom_ext", box_to_json(g.ext.dom)}});
    }
    return json{{"q", h.q}, {"charts", charts}, {"generators", gens}};
}

inline PseudogroupSpec pseudogroup_from_json(const json& j) {
    try {
        PseudogroupSpec h;
        h.q = j.at("q").get<int>();
        if (h.q < 1) throw ParseError("pseudogroup JSON: q must be positive");
        for (const auto& c : j.at("charts")) {
            Chart chart{c.at("id").get<std::string>(), box_from_json(c.at("box")),
                        box_from_json(c.at("ambient"))};
            if (chart.box.dim() != h.q || chart.ambient.dim() != h.q)
                throw ParseError("pseudogroup JSON: chart '" + chart.id +
                                 "' has boxes of the wrong dimension");
            if (h.find_chart(chart.id))
                throw ParseError("pseudogroup JSON: duplicate chart id '" + chart.id + "'");
            h.charts.push_back(std::move(chart));
        }
        for (const auto& g : j.at("generators")) {
            const std::string src = g.at("src").get<std::string>();
            const std::string dst = g.at("dst").get<std::string>();
            std::vector<Expression> fwd, inv;
            for (const auto& e : g.at("forward")) fwd.push_back(parse_expression(e.get<std::string>()));
            for (const auto& e : g.at("inverse")) inv.push_back(parse_expression(e.get<std::string>()));
            const Box dom = box_from_json(g.at("dom"));
            const Box dom_ext = box_from_json(g.at("dom_ext"));
            if (static_cast<int>(fwd.size()) != h.q || static_cast<int>(inv.size()) != h.q ||
                dom.dim() != h.q || dom_ext.dim() != h.q)
                throw ParseError("pseudogroup JSON: generator components disagree with q");
            h.chart(src);  // both charts must exist
            const Box& ambient = h.chart(dst).ambient;
            try {
                h.gens.push_back(
                    {detail::generator_map_from_parts(dom, fwd, inv, src, dst, ambient),
                     detail::generator_map_from_parts(dom_ext, fwd, inv, src, dst, ambient)});
            } catch (const InvalidGenerator& e) {
                throw ParseError(std::string("pseudogroup JSON: ") + e.what());
            }
        }
        return h;
    } catch (const json::exception& e) {
        throw ParseError(std::string("pseudogroup JSON: ") + e.what());
    } catch (const ChartMismatch& e) {
        throw ParseError(std::string("pseudogroup JSON: ") + e.what());
    }
}

// --- metric fields ------------------------------------------------------------
// Schema: {"chart", "region": box, "kind": "constant"|"grid"|"expr",
// "values": ...}.

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ParseError("matrix JSON must be a nonempty array of rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw ParseError("ragged matrix JSON");
        for (size_t k = 0; k < rows[i].size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
}

inline json metric_to_json(const MetricField& f) {
    json j;
    j["chart"] = f.chart;
    j["region"] = box_to_json(f.region);
    switch (f.kind) {
        case MetricField::Kind::Constant:
            j["kind"] = "constant";
            j["values"] = matrix_to_json(f.constant);
            break;
        case MetricField::Kind::Expr: {
            j["kind"] = "expr";
            json rows = json::array();
            for (int i = 0; i < f.q; ++i) {
                json row = json::array();
                for (int k = 0; k < f.q; ++k)
                    row.push_back(to_string(f.entries[static_cast<size_t>(i * f.q + k)]));
                rows.push_back(row);
            }
            j["values"] = rows;
            break;
        }
        case MetricField::Kind::Grid: {
            j["kind"] = "grid";
            j["nodes"] = f.grid_nodes;
            json vals = json::array();
            for (const auto& m : f.grid_values) vals.push_back(matrix_to_json(m));
            j["values"] = vals;
            break;
        }
    }
    return j;
}

inline MetricField metric_from_json(const json& j) {
    try {
        const std::string chart = j.at("chart").get<std::string>();
        const Box region = box_from_json(j.at("region"));
        const std::string kind = j.at("kind").get<std::string>();
        const int q = region.dim();
        const auto square_matrix = [&](const json& m) {
            const Matrix v = matrix_from_json(m);
            if (v.rows() != q || v.cols() != q)
                throw ParseError("metric JSON: value matrices must be q x q");
            return v;
        };
        if (kind == "constant")
            return MetricField::constant_field(chart, region, square_matrix(j.at("values")));
        if (kind == "expr") {
            std::vector<Expression> entries;
            for (const auto& row : j.at("values"))
                for (const auto& e : row) entries.push_back(parse_expression(e.get<std::string>()));
            if (static_cast<int>(entries.size()) != q * q)
                throw ParseError("metric JSON: expr field needs q x q entries");
            return MetricField::expr_field(chart, region, std::move(entries));
        }
        if (kind == "grid") {
            MetricField f;
            f.kind = MetricField::Kind::Grid;
            f.chart = chart;
            f.region = region;
            f.q = q;
            f.grid_nodes = j.at("nodes").get<int>();
            if (f.grid_nodes < 1) throw ParseError("metric JSON: grid needs at least one node");
            for (const auto& m : j.at("values")) f.grid_values.push_back(square_matrix(m));
            size_t expected = 1;
            for (int k = 0; k < q; ++k) expected *= static_cast<size_t>(f.grid_nodes);
            if (f.grid_values.size() != expected)
                throw ParseError("metric JSON: grid value count does not match nodes^q");
            return f;
        }
        throw ParseError("metric kind must be constant, grid or expr");
    } catch (const json::exception& e) {
        throw ParseError(std::string("metric JSON: ") + e.what());
    }
}

// --- scenarios -------------------------------------------------------------------

inline json scenario_to_json(const Scenario& s) {
    json ops;
    for (const auto& [chart, op] : s.operators) ops[chart] = operator_to_json(op);
    json avg;
    avg["chart"] = s.averaging_chart;
    avg["base_point"] = to_std(s.base_point);
    avg["transport_eps"] = s.transport_eps;
    avg["cover_word_len"] = s.cover_word_len;
    return json{{"name", s.name},
                {"description", s.description},
                {"q", s.q},
                {"operators", ops},
                {"pseudogroup", pseudogroup_to_json(s.pseudogroup)},
                {"averaging", avg}};
}

inline Scenario scenario_from_json(const json& j) {
    try {
        Scenario s;
        s.name = j.at("name").get<std::string>();
        s.description = j.value("description", std::string{});
        s.q = j.at("q").get<int>();
        for (const auto& [chart, op] : j.at("operators").items())
            s.operators.emplace(chart, operator_from_json(op));
        s.pseudogroup = pseudogroup_from_json(j.at("pseudogroup"));
        const auto& avg = j.at("averaging");
        s.averaging_chart = avg.at("chart").get<std::string>();
        s.base_point = to_vector(avg.at("base_point").get<std::vector<double>>());
        s.transport_eps = avg.at("transport_eps").get<double>();
        s.cover_word_len = avg.at("cover_word_len").get<int>();

        // cross-consistency
        if (s.pseudogroup.q != s.q) throw ParseError("scenario JSON: pseudogroup q differs");
        for (const auto& [chart, op] : s.operators) {
            if (op.q() != s.q) throw ParseError("scenario JSON: operator q differs on '" + chart + "'");
            if (!s.pseudogroup.find_chart(chart))
                throw ParseError("scenario JSON: operator on unknown chart '" + chart + "'");
        }
        for (const auto& c : s.pseudogroup.charts)
            if (!s.operators.count(c.id))
                throw ParseError("scenario JSON: chart '" + c.id + "' has no operator");
        if (!s.pseudogroup.find_chart(s.averaging_chart))
            throw ParseError("scenario JSON: unknown averaging chart");
        if (static_cast<int>(s.base_point.size()) != s.q)
            throw ParseError("scenario JSON: base point dimension differs from q");
        if (!(s.transport_eps > 0.0) || s.cover_word_len < 0)
            throw ParseError("scenario JSON: averaging parameters out of range");
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }
}

// --- files -----------------------------------------------------------------------

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ParseError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace foliage
