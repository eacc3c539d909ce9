#include <cmath>
#include <cstdio>

#include "json_util.hpp"
#include "ltr/io/io.hpp"

namespace ltr::io {

using detail::json;

namespace {

std::pair<double, double> pair_of(const json& v, const std::string& ctx) {
    const json& a = detail::array(v, ctx);
    if (a.size() != 2) {
        throw ParseError(ctx + ": expected [lo, hi]");
    }
    const double lo = detail::number(a[0], ctx + "[0]");
    const double hi = detail::number(a[1], ctx + "[1]");
    if (lo > hi) {
        throw ParseError(ctx + ": lo exceeds hi");
    }
    return {lo, hi};
}

int as_int(const json& v, const std::string& ctx) {
    const long long x = detail::integer(v, ctx);
    if (x < -1'000'000 || x > 1'000'000) {
        throw ParseError(ctx + ": integer out of range");
    }
    return static_cast<int>(x);
}

std::pair<int, int> int_pair(const json& v, const std::string& ctx) {
    const json& a = detail::array(v, ctx);
    if (a.size() != 2) {
        throw ParseError(ctx + ": expected [lo, hi]");
    }
    const int lo = as_int(a[0], ctx + "[0]");
    const int hi = as_int(a[1], ctx + "[1]");
    if (lo > hi) {
        throw ParseError(ctx + ": lo exceeds hi");
    }
    if (static_cast<long long>(hi) - lo > 4096) {
        throw ParseError(ctx + ": range too wide");
    }
    return {lo, hi};
}

TransformationSpec parse_transformation(const json& j, const std::string& ctx) {
    const std::string kind = detail::text(detail::field(j, "kind", ctx), ctx + ".kind");
    if (kind == "photometric") {
        auto mu = pair_of(detail::field(j, "mu", ctx), ctx + ".mu");
        auto nu = pair_of(detail::field(j, "nu", ctx), ctx + ".nu");
        return TransformationSpec::photometric({mu.first, mu.second}, {nu.first, nu.second});
    }
    if (kind == "translation") {
        if (j.contains("shifts")) {
            std::vector<std::pair<int, int>> shifts;
            const json& a = detail::array(j["shifts"], ctx + ".shifts");
            for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string c = detail::at(ctx + ".shifts", i);
                const json& p = detail::array(a[i], c);
                if (p.size() != 2) {
                    throw ParseError(c + ": expected [tx, ty]");
                }
                shifts.emplace_back(as_int(p[0], c + "[0]"), as_int(p[1], c + "[1]"));
            }
            return TransformationSpec::translation(std::move(shifts));
        }
        auto tx = int_pair(detail::field(j, "tx", ctx), ctx + ".tx");
        auto ty = int_pair(detail::field(j, "ty", ctx), ctx + ".ty");
        return TransformationSpec::translation_box(tx.first, tx.second, ty.first, ty.second);
    }
    if (kind == "subsample" || kind == "zoom") {
        std::vector<int> factors;
        if (j.contains("range")) {
            auto r = int_pair(j["range"], ctx + ".range");
            for (int d = r.first; d <= r.second; ++d) {
                factors.push_back(d);
            }
        } else {
            const json& a = detail::array(detail::field(j, "factors", ctx), ctx + ".factors");
            for (std::size_t i = 0; i < a.size(); ++i) {
                factors.push_back(as_int(a[i], detail::at(ctx + ".factors", i)));
            }
        }
        return kind == "zoom" ? TransformationSpec::zoom(std::move(factors))
                              : TransformationSpec::subsample(std::move(factors));
    }
    throw ParseError(ctx + ".kind: unknown transformation '" + kind + "'");
}

json transformation_json(const TransformationSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    switch (s.kind) {
        case TransformKind::Photometric:
            j["mu"] = {s.contrast.lo, s.contrast.hi};
            j["nu"] = {s.luminosity.lo, s.luminosity.hi};
            break;
        case TransformKind::Translation: {
            if (!s.shifts.empty()) {
                int txl = s.shifts[0].first, txh = txl, tyl = s.shifts[0].second, tyh = tyl;
                for (auto [a, b] : s.shifts) {
                    txl = std::min(txl, a);
                    txh = std::max(txh, a);
                    tyl = std::min(tyl, b);
                    tyh = std::max(tyh, b);
                }
                if (TransformationSpec::translation_box(txl, txh, tyl, tyh).shifts == s.shifts) {
                    j["tx"] = {txl, txh};
                    j["ty"] = {tyl, tyh};
                    break;
                }
            }
            j["shifts"] = json::array();
            for (auto [a, b] : s.shifts) {
                j["shifts"].push_back({a, b});
            }
            break;
        }
        case TransformKind::Subsample:
        case TransformKind::Zoom:
            j["factors"] = s.factors;
            break;
        case TransformKind::Perturbation:
            throw DomainError("perturbation is written as the query's rho");
    }
    return j;
}

std::string branching_name(milp::BranchingRule r) {
    return r == milp::BranchingRule::MostFractional ? "most_fractional" : "first_fractional";
}

}  // namespace

milp::SolverConfig SolverOverrides::apply(milp::SolverConfig config) const {
    if (timeout_seconds) {
        config.timeout_seconds = *timeout_seconds;
    }
    if (branching_rule) {
        config.branching_rule = *branching_rule;
    }
    if (node_limit) {
        config.node_limit = *node_limit;
    }
    return config;
}

QueryDocument parse_query(std::string_view text) {
    const json doc = detail::parse_json(text, "query");
    QueryDocument q;
    q.network_path = detail::text(detail::field(doc, "network", "query"), "query.network");
    q.image_path = detail::text(detail::field(doc, "image", "query"), "query.image");
    if (doc.contains("image_index")) {
        q.image_index = detail::count(doc["image_index"], "query.image_index");
    }
    if (doc.contains("label") && !doc["label"].is_null()) {
        q.label = as_int(doc["label"], "query.label");
    }
    if (doc.contains("normalize")) {
        if (!doc["normalize"].is_boolean()) {
            throw ParseError("query.normalize: expected true or false");
        }
        q.normalize = doc["normalize"].get<bool>();
    }
    if (doc.contains("domain")) {
        q.domain = detail::text(doc["domain"], "query.domain");
    }
    if (doc.contains("transformations")) {
        const json& list = detail::array(doc["transformations"], "query.transformations");
        for (std::size_t i = 0; i < list.size(); ++i) {
            q.transformations.push_back(parse_transformation(list[i], detail::at("query.transformations", i)));
        }
    }
    if (doc.contains("rho")) {
        q.rho = detail::number(doc["rho"], "query.rho");
        if (!(q.rho >= 0.0)) {
            throw ParseError("query.rho: must be non-negative");
        }
    }
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        if (!s.is_object()) {
            throw ParseError("query.solver: expected an object");
        }
        if (s.contains("timeout")) {
            q.solver.timeout_seconds = detail::number(s["timeout"], "query.solver.timeout");
        }
        if (s.contains("branching")) {
            const std::string b = detail::text(s["branching"], "query.solver.branching");
            if (b == "most_fractional") {
                q.solver.branching_rule = milp::BranchingRule::MostFractional;
            } else if (b == "first_fractional") {
                q.solver.branching_rule = milp::BranchingRule::FirstFractional;
            } else {
                throw ParseError("query.solver.branching: unknown rule '" + b + "'");
            }
        }
        if (s.contains("node_limit")) {
            q.solver.node_limit = detail::count(s["node_limit"], "query.solver.node_limit");
        }
    }
    return q;
}

std::string serialize_query(const QueryDocument& q) {
    json doc;
    doc["network"] = q.network_path;
    doc["image"] = q.image_path;
    doc["image_index"] = q.image_index;
    if (q.label) {
        doc["label"] = *q.label;
    }
    doc["normalize"] = q.normalize;
    doc["domain"] = q.domain;
    doc["transformations"] = json::array();
    for (const auto& t : q.transformations) {
        doc["transformations"].push_back(transformation_json(t));
    }
    doc["rho"] = q.rho;
    json s = json::object();
    if (q.solver.timeout_seconds) {
        s["timeout"] = *q.solver.timeout_seconds;
    }
    if (q.solver.branching_rule) {
        s["branching"] = branching_name(*q.solver.branching_rule);
    }
    if (q.solver.node_limit) {
        s["node_limit"] = *q.solver.node_limit;
    }
    if (!s.empty()) {
        doc["solver"] = s;
    }
    return doc.dump(2) + "\n";
}

QueryDocument load_query(const std::string& path) {
    try {
        return parse_query(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

OutcomeDocument parse_outcome(std::string_view text) {
    const json doc = detail::parse_json(text, "outcome");
    OutcomeDocument o;
    o.name = detail::text(detail::field(doc, "name", "outcome"), "outcome.name");
    o.verdict = detail::text(detail::field(doc, "verdict", "outcome"), "outcome.verdict");
    if (o.verdict != "robust" && o.verdict != "not_robust" && o.verdict != "undecided") {
        throw ParseError("outcome.verdict: unknown verdict '" + o.verdict + "'");
    }
    if (doc.contains("reason")) {
        o.reason = detail::text(doc["reason"], "outcome.reason");
    }
    o.label = as_int(detail::field(doc, "label", "outcome"), "outcome.label");
    if (doc.contains("adversarial_label")) {
        o.adversarial_label = as_int(doc["adversarial_label"], "outcome.adversarial_label");
    }
    if (doc.contains("replay_confirmed")) {
        if (!doc["replay_confirmed"].is_boolean()) {
            throw ParseError("outcome.replay_confirmed: expected true or false");
        }
        o.replay_confirmed = doc["replay_confirmed"].get<bool>();
    }
    if (doc.contains("instantiation")) {
        const json& list = detail::array(doc["instantiation"], "outcome.instantiation");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string ctx = detail::at("outcome.instantiation", i);
            const std::string kind = detail::text(detail::field(list[i], "kind", ctx), ctx + ".kind");
            TransformationRecord r;
            if (kind == "photometric") {
                r.kind = TransformKind::Photometric;
            } else if (kind == "translation") {
                r.kind = TransformKind::Translation;
            } else if (kind == "subsample") {
                r.kind = TransformKind::Subsample;
            } else if (kind == "zoom") {
                r.kind = TransformKind::Zoom;
            } else {
                throw ParseError(ctx + ".kind: unknown transformation '" + kind + "'");
            }
            const json& values = detail::array(detail::field(list[i], "values", ctx), ctx + ".values");
            for (std::size_t k = 0; k < values.size(); ++k) {
                r.values.push_back(detail::number(values[k], detail::at(ctx + ".values", k)));
            }
            o.instantiation.push_back(std::move(r));
        }
    }
    if (doc.contains("counterexample") && !doc["counterexample"].is_null()) {
        o.counterexample = parse_image(doc["counterexample"].dump());
    }
    return o;
}

std::string serialize_outcome(const OutcomeDocument& o) {
    json doc;
    doc["name"] = o.name;
    doc["verdict"] = o.verdict;
    doc["reason"] = o.reason;
    doc["label"] = o.label;
    doc["adversarial_label"] = o.adversarial_label;
    doc["replay_confirmed"] = o.replay_confirmed;
    doc["instantiation"] = json::array();
    for (const auto& r : o.instantiation) {
        doc["instantiation"].push_back({{"kind", to_string(r.kind)}, {"values", r.values}});
    }
    doc["counterexample"] = o.counterexample ? json::parse(encode_image(*o.counterexample, ImageFormat::Json)) : json();
    return doc.dump(1) + "\n";
}

std::string format_instantiation(const std::vector<TransformationRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        if (!out.empty()) {
            out += ";";
        }
        out += to_string(r.kind) + "(";
        for (std::size_t k = 0; k < r.values.size(); ++k) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10g", r.values[k]);
            out += (k ? "," : "") + std::string(buf);
        }
        out += ")";
    }
    return out.empty() ? "identity" : out;
}

}  // namespace ltr::io
