#include "symper/serialization.hpp"

#include "symper/errors.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace symper {

std::string format_number(double value) {
    return fmt::format("{:.17g}", value);
}

Json number_to_json(std::optional<double> value) {
    if (!value || std::isnan(*value)) {
        return nullptr;
    }
    if (std::isinf(*value)) {
        return *value > 0 ? "inf" : "-inf";
    }
    return *value;
}

std::optional<double> number_from_json(const Json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        throw InvalidArgument("unexpected string '" + s + "' where a number was expected");
    }
    if (!j.is_number()) {
        throw InvalidArgument("expected a number");
    }
    return j.get<double>();
}

namespace {

Json to_json(const Criterion& c) {
    return Json{{"pass", c.pass}, {"value", number_to_json(c.value)}, {"bound", number_to_json(c.bound)}};
}

Criterion criterion_from_json(const Json& j) {
    Criterion c;
    c.pass = j.at("pass").get<bool>();
    c.value = number_from_json(j.at("value"));
    c.bound = number_from_json(j.at("bound")).value_or(0.0);
    return c;
}

}  // namespace

Json to_json(const StabilityTolerances& tol) {
    return Json{{"circle", tol.circle},
                {"form_relative", tol.form_relative},
                {"cluster_radius", tol.cluster_radius},
                {"rank_threshold", tol.rank_threshold},
                {"gap_floor", tol.gap_floor},
                {"psd_relative", tol.psd_relative},
                {"projector", tol.projector},
                {"imaginary", tol.imaginary},
                {"s0_form", std::string(to_string(tol.s0_form))}};
}

StabilityTolerances tolerances_from_json(const Json& j) {
    StabilityTolerances tol;
    tol.circle = j.at("circle").get<double>();
    tol.form_relative = j.at("form_relative").get<double>();
    tol.cluster_radius = j.at("cluster_radius").get<double>();
    tol.rank_threshold = j.at("rank_threshold").get<double>();
    tol.gap_floor = j.at("gap_floor").get<double>();
    tol.psd_relative = j.at("psd_relative").get<double>();
    tol.projector = j.at("projector").get<double>();
    tol.imaginary = j.at("imaginary").get<double>();
    tol.s0_form = parse_s0_form(j.at("s0_form").get<std::string>());
    return tol;
}

Json to_json(const StabilityVerdict& v) {
    Json criteria;
    criteria["unit_circle"] = to_json(v.unit_circle);
    criteria["semi_simple"] = to_json(v.semi_simple);
    criteria["no_mixed_color"] = to_json(v.no_mixed_color);
    criteria["color_gap"] = to_json(v.color_gap);
    Json definiteness = to_json(v.definiteness);
    definiteness["min_eig_s_red"] = number_to_json(v.min_eig_s_red);
    definiteness["max_eig_s_green"] = number_to_json(v.max_eig_s_green);
    criteria["definiteness"] = definiteness;
    Json projector = to_json(v.projector);
    projector["completeness_residual"] = number_to_json(v.completeness_residual);
    projector["cross_residual"] = number_to_json(v.cross_residual);
    criteria["projector"] = projector;
    criteria["kgl"] = to_json(v.kgl);

    return Json{{"schema", kVerdictSchema},
                {"stable", v.stable},
                {"strongly_stable", v.strongly_stable},
                {"delta_kgl", number_to_json(v.delta_kgl)},
                {"delta_color", number_to_json(v.delta_color)},
                {"max_modulus", v.max_modulus},
                {"criteria", criteria},
                {"tolerances", to_json(v.tolerances)}};
}

StabilityVerdict verdict_from_json(const Json& j) {
    try {
        if (j.at("schema").get<std::string>() != kVerdictSchema) {
            throw InvalidArgument("verdict JSON has schema '" + j.at("schema").get<std::string>() + "', expected " +
                                  kVerdictSchema);
        }
        StabilityVerdict v;
        v.stable = j.at("stable").get<bool>();
        v.strongly_stable = j.at("strongly_stable").get<bool>();
        v.delta_kgl = number_from_json(j.at("delta_kgl"));
        v.delta_color = number_from_json(j.at("delta_color"));
        v.max_modulus = j.at("max_modulus").get<double>();
        const Json& c = j.at("criteria");
        v.unit_circle = criterion_from_json(c.at("unit_circle"));
        v.semi_simple = criterion_from_json(c.at("semi_simple"));
        v.no_mixed_color = criterion_from_json(c.at("no_mixed_color"));
        v.color_gap = criterion_from_json(c.at("color_gap"));
        v.definiteness = criterion_from_json(c.at("definiteness"));
        v.min_eig_s_red = number_from_json(c.at("definiteness").at("min_eig_s_red"));
        v.max_eig_s_green = number_from_json(c.at("definiteness").at("max_eig_s_green"));
        v.projector = criterion_from_json(c.at("projector"));
        v.completeness_residual = number_from_json(c.at("projector").at("completeness_residual"));
        v.cross_residual = number_from_json(c.at("projector").at("cross_residual"));
        v.kgl = criterion_from_json(c.at("kgl"));
        v.tolerances = tolerances_from_json(j.at("tolerances"));
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed verdict JSON: ") + e.what());
    }
}

Json to_json(const std::vector<MultiplierRecord>& records) {
    Json out = Json::array();
    for (const auto& r : records) {
        out.push_back(Json{{"re", r.value.real()},
                           {"im", r.value.imag()},
                           {"modulus", r.modulus},
                           {"kind", std::string(to_string(r.kind))},
                           {"color", std::string(to_string(r.color))},
                           {"kind_form", r.kind_form},
                           {"color_form", r.color_form},
                           {"cluster", r.cluster},
                           {"cluster_size", r.cluster_size},
                           {"semi_simple", r.semi_simple}});
    }
    return out;
}

Json to_json(const NeighborhoodReport& report) {
    Json rows = Json::array();
    for (const auto& row : report.rows) {
        Json r{{"scale", row.scale},
               {"e_norm_max", number_to_json(row.e_norm_max)},
               {"rank_one_norm", number_to_json(row.rank_one_norm)},
               {"psi_max", number_to_json(row.psi_max)},
               {"max_residual", number_to_json(row.max_residual)}};
        if (row.verdict) {
            r["stable"] = row.verdict->stable;
            r["strongly_stable"] = row.verdict->strongly_stable;
            r["delta_color"] = number_to_json(row.verdict->delta_color);
            r["max_modulus"] = row.verdict->max_modulus;
        } else {
            r["stable"] = nullptr;
            r["strongly_stable"] = nullptr;
            r["delta_color"] = nullptr;
            r["max_modulus"] = nullptr;
        }
        r["error"] = row.ok() ? Json(nullptr) : Json(row.error);
        rows.push_back(std::move(r));
    }
    return Json{{"schema", kNeighborhoodSchema},
                {"base_verdict", to_json(report.base_verdict)},
                {"largest_stable_scale", number_to_json(report.largest_stable_scale)},
                {"rows", rows}};
}

void write_psi_csv(std::ostream& out, const PsiSeries& series) {
    out << "t,psi\n";
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        out << format_number(series.times[k]) << ',' << format_number(series.psi[k]) << '\n';
    }
}

}  // namespace symper
