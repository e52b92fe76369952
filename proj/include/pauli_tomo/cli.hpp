// Copyright 2026 The pauli-tomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: simulate, risk, optimize, two-step, reproduce.
//
// Every command reads an optional JSON run configuration; command-line flags
// override the matching config fields. Reports go to --out (stdout when
// absent) as CSV with a fixed header or as a JSON document.
//
// Exit codes: 0 success, 1 acceptance failure, 2 usage or configuration error.

#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pauli_tomo/acceptance.hpp"
#include "pauli_tomo/core_model.hpp"
#include "pauli_tomo/design_opt.hpp"
#include "pauli_tomo/experiment.hpp"
#include "pauli_tomo/extraction.hpp"
#include "pauli_tomo/format.hpp"
#include "pauli_tomo/risk.hpp"

namespace pauli_tomo::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitAcceptance = 1;
inline constexpr int kExitUsage = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

struct RunConfig {
    ChannelParams channel{{0.8, 0.65, 0.5}, {}};
    ExperimentDesign design{};
    std::optional<std::uint64_t> trials;
    std::uint64_t seed = 1;
    std::optional<std::string> out;
    std::optional<Format> format;
    OptimizerConfig optimizer{};
    bool planar = false;
    bool emit_surface = false;
    std::optional<std::uint64_t> budget;
    double split = kDefaultSplit;
};

// ---------------------------------------------------------------------------
// Configuration

namespace detail {

inline Format parse_format(const std::string &s) {
    if (s == "csv") {
        return Format::csv;
    }
    if (s == "json") {
        return Format::json;
    }
    throw ConfigError("format must be \"csv\" or \"json\", got \"" + s + "\"");
}

inline void reject_unknown(const json &obj, std::initializer_list<const char *> keys, const std::string &where) {
    for (const auto &[k, v] : obj.items()) {
        bool known = false;
        for (const char *key : keys) {
            known = known || k == key;
        }
        if (!known) {
            throw ConfigError("unknown key \"" + k + "\" in " + where);
        }
    }
}

inline const json &require_object(const json &j, const std::string &where) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    return j;
}

inline double number(const json &j, const std::string &where) {
    if (!j.is_number()) {
        throw ConfigError(where + " must be a number");
    }
    return j.get<double>();
}

inline std::uint64_t count(const json &j, const std::string &where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw ConfigError(where + " must be a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

inline std::vector<double> numbers(const json &j, const std::string &where) {
    if (!j.is_array()) {
        throw ConfigError(where + " must be an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline AngleTriple angles(const json &j, const std::string &where) {
    const std::vector<double> v = numbers(j, where);
    if (v.size() != 3) {
        throw ConfigError(where + " must have 3 entries (z, y, x)");
    }
    return {v[0], v[1], v[2]};
}

}  // namespace detail

/// Parses a run configuration document. Missing fields keep their defaults.
inline RunConfig parse_config(const json &doc) {
    using namespace detail;
    RunConfig cfg;
    require_object(doc, "configuration");
    reject_unknown(doc,
                   {"channel", "design", "trials", "seed", "out", "format", "optimizer", "planar", "emit_surface",
                    "two_step"},
                   "configuration");
    if (doc.contains("channel")) {
        const json &c = require_object(doc["channel"], "channel");
        reject_unknown(c, {"lambda", "phi"}, "channel");
        if (c.contains("lambda")) {
            const std::vector<double> l = numbers(c["lambda"], "channel.lambda");
            if (l.size() == 2) {
                cfg.channel.lambda = {l[0], l[1], 0.0};
            } else if (l.size() == 3) {
                cfg.channel.lambda = {l[0], l[1], l[2]};
            } else {
                throw ConfigError("channel.lambda must have 3 entries (2 for planar runs)");
            }
        }
        if (c.contains("phi")) {
            cfg.channel.phi = angles(c["phi"], "channel.phi");
        }
    }
    if (doc.contains("design")) {
        const json &d = require_object(doc["design"], "design");
        reject_unknown(d, {"vartheta", "tau", "shots"}, "design");
        if (d.contains("vartheta")) {
            cfg.design.input = angles(d["vartheta"], "design.vartheta");
        }
        if (d.contains("tau")) {
            cfg.design.meas = angles(d["tau"], "design.tau");
        }
        if (d.contains("shots")) {
            cfg.design.shots = count(d["shots"], "design.shots");
        }
    }
    if (doc.contains("trials")) {
        cfg.trials = count(doc["trials"], "trials");
    }
    if (doc.contains("seed")) {
        cfg.seed = count(doc["seed"], "seed");
    }
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) {
            throw ConfigError("out must be a string");
        }
        cfg.out = doc["out"].get<std::string>();
    }
    if (doc.contains("format")) {
        if (!doc["format"].is_string()) {
            throw ConfigError("format must be a string");
        }
        cfg.format = parse_format(doc["format"].get<std::string>());
    }
    if (doc.contains("optimizer")) {
        const json &o = require_object(doc["optimizer"], "optimizer");
        reject_unknown(o, {"grid_nodes", "starts", "max_iterations", "tolerance"}, "optimizer");
        if (o.contains("grid_nodes")) {
            cfg.optimizer.grid_nodes = static_cast<int>(count(o["grid_nodes"], "optimizer.grid_nodes"));
        }
        if (o.contains("starts")) {
            cfg.optimizer.starts = static_cast<int>(count(o["starts"], "optimizer.starts"));
        }
        if (o.contains("max_iterations")) {
            cfg.optimizer.max_iterations = static_cast<int>(count(o["max_iterations"], "optimizer.max_iterations"));
        }
        if (o.contains("tolerance")) {
            cfg.optimizer.tolerance = number(o["tolerance"], "optimizer.tolerance");
        }
    }
    for (const char *flag : {"planar", "emit_surface"}) {
        if (doc.contains(flag)) {
            if (!doc[flag].is_boolean()) {
                throw ConfigError(std::string(flag) + " must be true or false");
            }
            (std::string(flag) == "planar" ? cfg.planar : cfg.emit_surface) = doc[flag].get<bool>();
        }
    }
    if (doc.contains("two_step")) {
        const json &t = require_object(doc["two_step"], "two_step");
        reject_unknown(t, {"budget", "split"}, "two_step");
        if (t.contains("budget")) {
            cfg.budget = count(t["budget"], "two_step.budget");
        }
        if (t.contains("split")) {
            cfg.split = number(t["split"], "two_step.split");
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file \"" + path + "\"");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("malformed config file \"" + path + "\": " + e.what());
    }
    return parse_config(doc);
}

/// Range and CP checks on the channel, shared by every command.
inline void validate_channel(const ChannelParams &p) {
    const Contractions &l = p.lambda;
    pauli_tomo::detail::require_finite(l);
    pauli_tomo::detail::require_finite(p.phi);
    for (int i = 0; i < 3; ++i) {
        if (std::abs(l[i]) > 1.0) {
            throw InvalidArgument("channel contractions must lie in [-1, 1]");
        }
    }
    if (!l.is_sorted_desc()) {
        throw InvalidArgument("channel contractions must be sorted: lambda1 >= lambda2 >= lambda3");
    }
    if (!cp_check(l)) {
        throw InvalidArgument("channel contractions violate complete positivity 1 +- l3 >= |l1 +- l2|");
    }
    for (double a : p.phi.as_array()) {
        if (!(a >= 0.0 && a < kPi)) {
            throw InvalidArgument("channel angles must lie in [0, pi)");
        }
    }
}

// ---------------------------------------------------------------------------
// Report writers

namespace detail {

inline std::string csv_quote(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream &os) : os_(os) {}

    void row(const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os_ << (i ? "," : "") << csv_quote(cells[i]);
        }
        os_ << '\n';
    }

private:
    std::ostream &os_;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }

inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json jangles(const AngleTriple &a) { return json::array({a.z, a.y, a.x}); }

inline json jlambda(const Contractions &l) { return json::array({l.l1, l.l2, l.l3}); }

inline json jmatrix(const Mat3 &m) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) {
        rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
    }
    return rows;
}

inline json jreport(const RiskReport &r) {
    return {{"mode", to_string(r.mode)}, {"shots", r.shots},          {"trials", r.trials},
            {"f", jnum(r.f)},           {"g", jnum(r.g)},            {"h", jnum(r.h)},
            {"se_f", jnum(r.se_f)},     {"se_g", jnum(r.se_g)},      {"se_h", jnum(r.se_h)},
            {"f_bound", jnum(r.f_bound)}, {"g_bound", jnum(r.g_bound)}};
}

inline json jconfig(const RunConfig &cfg) {
    return {{"channel", {{"lambda", jlambda(cfg.channel.lambda)}, {"phi", jangles(cfg.channel.phi)}}},
            {"design",
             {{"vartheta", jangles(cfg.design.input)},
              {"tau", jangles(cfg.design.meas)},
              {"shots", cfg.design.shots}}},
            {"seed", cfg.seed}};
}

inline std::vector<std::string> report_cells(const RiskReport &r) {
    return {to_string(r.mode), cell(r.shots), cell(r.trials), cell(r.f),       cell(r.g),      cell(r.h),
            cell(r.se_f),      cell(r.se_g),  cell(r.se_h),   cell(r.f_bound), cell(r.g_bound)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

/// One row per trial: counts, A^, extracted parameters and their errors.
inline int cmd_simulate(const RunConfig &cfg, std::ostream &os) {
    using namespace detail;
    validate_channel(cfg.channel);
    validate(cfg.design);
    const std::uint64_t trials = cfg.trials.value_or(1);
    if (trials < 1) {
        throw InvalidArgument("simulate needs at least one trial");
    }
    const ChannelParams truth = canonicalize(cfg.channel.lambda, rotation_zyx(cfg.channel.phi));
    const ChannelMatrix a = compose_channel_matrix(truth);
    const OrthogonalFrame input = build_frame(cfg.design.input);
    const OrthogonalFrame meas = build_frame(cfg.design.meas);
    const OutcomeMatrix x = forward_outcomes(a, input, meas);

    const Format fmt = cfg.format.value_or(Format::csv);
    CsvWriter csv(os);
    json runs = json::array();
    if (fmt == Format::csv) {
        std::vector<std::string> head{"trial"};
        for (const char *prefix : {"n_", "a_"}) {
            for (int i = 1; i <= 3; ++i) {
                for (int j = 1; j <= 3; ++j) {
                    head.push_back(prefix + std::to_string(i) + std::to_string(j));
                }
            }
        }
        for (const char *name : {"lambda1", "lambda2", "lambda3", "phi_z", "phi_y", "phi_x", "cp_valid",
                                 "err_lambda1", "err_lambda2", "err_lambda3", "err_phi_z", "err_phi_y", "err_phi_x"}) {
            head.emplace_back(name);
        }
        csv.row(head);
    }
    for (std::uint64_t t = 0; t < trials; ++t) {
        const CountsMatrix counts = sample_counts(x, cfg.design.shots, cfg.seed, t);
        const Mat3 a_hat = estimate_channel_matrix(estimate_x(counts, cfg.design.shots), input, meas);
        const ParamEstimate est = extract_params(a_hat);
        std::array<double, 3> err_l{};
        std::array<double, 3> err_phi{};
        const auto ph = est.phi.as_array();
        const auto pt = truth.phi.as_array();
        for (int i = 0; i < 3; ++i) {
            err_l[i] = est.lambda[i] - truth.lambda[i];
            err_phi[i] = angle_distance(ph[i], pt[i]);
        }
        if (fmt == Format::csv) {
            std::vector<std::string> r{cell(t)};
            for (std::uint64_t n : counts.n) {
                r.push_back(cell(n));
            }
            for (int k = 0; k < 9; ++k) {
                r.push_back(cell(a_hat(k / 3, k % 3)));
            }
            for (int i = 0; i < 3; ++i) {
                r.push_back(cell(est.lambda[i]));
            }
            for (double v : ph) {
                r.push_back(cell(v));
            }
            r.emplace_back(est.cp_valid ? "true" : "false");
            for (double v : err_l) {
                r.push_back(cell(v));
            }
            for (double v : err_phi) {
                r.push_back(cell(v));
            }
            csv.row(r);
        } else {
            json c = json::array();
            for (int i = 0; i < 3; ++i) {
                c.push_back(json::array({counts(i, 0), counts(i, 1), counts(i, 2)}));
            }
            runs.push_back({{"trial", t},
                            {"counts", c},
                            {"a_hat", jmatrix(a_hat)},
                            {"lambda", jlambda(est.lambda)},
                            {"phi", jangles(est.phi)},
                            {"cp_valid", est.cp_valid},
                            {"errors", {{"lambda", err_l}, {"phi", err_phi}}}});
        }
    }
    if (fmt == Format::json) {
        json doc = jconfig(cfg);
        doc["command"] = "simulate";
        doc["truth"] = {{"lambda", jlambda(truth.lambda)}, {"phi", jangles(truth.phi)}};
        doc["trials"] = runs;
        os << doc.dump(2) << '\n';
    }
    return kExitOk;
}

/// Analytic losses, plus Monte Carlo losses when trials > 0.
inline int cmd_risk(const RunConfig &cfg, std::ostream &os) {
    using namespace detail;
    validate_channel(cfg.channel);
    validate(cfg.design);
    const std::uint64_t trials = cfg.trials.value_or(0);
    std::vector<RiskReport> reports{analytic_report(cfg.channel, cfg.design)};
    if (trials > 0) {
        reports.push_back(mc_loss(cfg.channel, cfg.design, trials, cfg.seed));
    }
    if (cfg.format.value_or(Format::csv) == Format::csv) {
        CsvWriter csv(os);
        csv.row({"mode", "shots", "trials", "f", "g", "h", "se_f", "se_g", "se_h", "f_bound", "g_bound"});
        for (const RiskReport &r : reports) {
            csv.row(report_cells(r));
        }
    } else {
        json doc = jconfig(cfg);
        doc["command"] = "risk";
        doc["reports"] = json::array();
        for (const RiskReport &r : reports) {
            doc["reports"].push_back(jreport(r));
        }
        os << doc.dump(2) << '\n';
    }
    return kExitOk;
}

namespace detail {

inline int optimize_planar_report(const RunConfig &cfg, std::ostream &os) {
    const Contractions &l = cfg.channel.lambda;
    if (l.l3 != 0.0) {
        throw InvalidArgument("planar optimization requires lambda3 = 0");
    }
    OptimizerConfig oc = cfg.optimizer;
    oc.keep_surface = cfg.emit_surface;
    const PlanarOptimum opt = optimize_planar(l.l1, l.l2, cfg.design.shots, oc);
    const H2Optimum closed = h2_optimal_design(l.l1, l.l2, cfg.design.shots);
    if (cfg.format.value_or(Format::csv) == Format::csv) {
        CsvWriter csv(os);
        csv.row({"kind", "tau", "vartheta", "h_tilde", "gap"});
        csv.row({"optimum", cell(opt.tau), cell(opt.vartheta), cell(opt.h_min), cell(0.0)});
        csv.row({"closed_form", cell(closed.tau), cell(closed.tau), cell(closed.value),
                 cell(closed.value - opt.h_min)});
        csv.row({"closed_form_alt", cell(closed.tau_alt), cell(closed.tau_alt), cell(closed.value),
                 cell(closed.value - opt.h_min)});
        for (const auto &[t, v, h] : opt.surface) {
            csv.row({"grid", cell(t), cell(v), cell(h), cell(h - opt.h_min)});
        }
    } else {
        json doc = jconfig(cfg);
        doc["command"] = "optimize";
        doc["planar"] = true;
        doc["optimum"] = {{"tau", opt.tau}, {"vartheta", opt.vartheta}, {"h_tilde", opt.h_min}};
        doc["closed_form"] = {
            {"tau", closed.tau}, {"tau_alt", closed.tau_alt}, {"h_tilde", closed.value}, {"regime", closed.regime}};
        if (cfg.emit_surface) {
            json s = json::array();
            for (const auto &[t, v, h] : opt.surface) {
                s.push_back(json::array({t, v, h}));
            }
            doc["surface"] = s;
        }
        os << doc.dump(2) << '\n';
    }
    return kExitOk;
}

}  // namespace detail

/// Optimal design search and comparison with the conjectured designs.
inline int cmd_optimize(const RunConfig &cfg, std::ostream &os) {
    using namespace detail;
    if (cfg.design.shots < 1) {
        throw InvalidArgument("shots must be at least 1");
    }
    validate(cfg.optimizer);
    if (cfg.planar) {
        return optimize_planar_report(cfg, os);
    }
    validate_channel(cfg.channel);
    OptimizerConfig oc = cfg.optimizer;
    oc.keep_surface = cfg.emit_surface;
    const Contractions &l = cfg.channel.lambda;
    const ConjectureReport r = conjecture_report(l, cfg.design.shots, oc);
    const AngleTriple zero{};
    struct Row {
        const char *kind;
        AngleTriple tau;
        AngleTriple vartheta;
        double h;
    };
    const std::vector<Row> rows{
        {"optimum", r.optimum.tau, r.optimum.vartheta, r.optimum.h_min},
        {"conjecture_1", kConjectureDesign1, kConjectureDesign1, r.h_conjecture_1},
        {"conjecture_2", kConjectureDesign2, kConjectureDesign2, r.h_conjecture_2},
        {"zero_design", zero, zero, r.h_zero},
    };
    if (cfg.format.value_or(Format::csv) == Format::csv) {
        CsvWriter csv(os);
        csv.row({"kind", "tau_z", "tau_y", "tau_x", "vartheta_z", "vartheta_y", "vartheta_x", "h_tilde", "gap",
                 "tau_vartheta_distance"});
        auto emit = [&](const char *kind, const AngleTriple &t, const AngleTriple &v, double h) {
            csv.row({kind, cell(t.z), cell(t.y), cell(t.x), cell(v.z), cell(v.y), cell(v.x), cell(h),
                     cell(h - r.optimum.h_min), cell(angle_residual(t, v))});
        };
        for (const Row &row : rows) {
            emit(row.kind, row.tau, row.vartheta, row.h);
        }
        for (const SurfacePoint &p : r.optimum.surface) {
            emit("grid", p.tau, p.vartheta, p.h);
        }
    } else {
        json doc = jconfig(cfg);
        doc["command"] = "optimize";
        doc["planar"] = false;
        doc["designs"] = json::array();
        for (const Row &row : rows) {
            doc["designs"].push_back({{"kind", row.kind},
                                      {"tau", jangles(row.tau)},
                                      {"vartheta", jangles(row.vartheta)},
                                      {"h_tilde", row.h},
                                      {"gap", row.h - r.optimum.h_min}});
        }
        doc["symmetry_residual"] = r.symmetry_residual;
        if (cfg.emit_surface) {
            json s = json::array();
            for (const SurfacePoint &p : r.optimum.surface) {
                s.push_back({{"tau", jangles(p.tau)}, {"vartheta", jangles(p.vartheta)}, {"h_tilde", p.h}});
            }
            doc["surface"] = s;
        }
        os << doc.dump(2) << '\n';
    }
    return kExitOk;
}

/// Two-step protocol: per-replication estimates, their mean losses, and the
/// single-step losses at the configured design for the same total budget.
inline int cmd_two_step(const RunConfig &cfg, std::ostream &os) {
    using namespace detail;
    validate_channel(cfg.channel);
    validate(cfg.design);
    const std::uint64_t budget = cfg.budget.value_or(9 * cfg.design.shots);
    const std::uint64_t reps = cfg.trials.value_or(1);
    if (reps < 1) {
        throw InvalidArgument("two-step needs at least one replication");
    }
    const ChannelParams truth = canonicalize(cfg.channel.lambda, rotation_zyx(cfg.channel.phi));
    const auto [n1, n2] = two_step_shots(budget, cfg.split);
    std::vector<TwoStepResult> runs;
    for (std::uint64_t r = 0; r < reps; ++r) {
        runs.push_back(two_step_tomography(truth, budget, cfg.split, cfg.seed, r));
    }
    const RiskReport mean = two_step_risk(truth, budget, cfg.split, reps, cfg.seed);
    const ExperimentDesign single{cfg.design.input, cfg.design.meas, budget / 9};
    const RiskReport base = mc_loss(truth, single, reps, cfg.seed);

    if (cfg.format.value_or(Format::csv) == Format::csv) {
        CsvWriter csv(os);
        csv.row({"kind", "replication", "stage1_shots", "stage2_shots", "lambda1", "lambda2", "lambda3", "phi_z",
                 "phi_y", "phi_x", "f", "g", "h", "se_f", "se_g", "se_h", "g_bound"});
        for (std::uint64_t r = 0; r < reps; ++r) {
            const TwoStepResult &t = runs[r];
            const ParamEstimate &e = t.estimate;
            csv.row({"replication", cell(r), cell(n1), cell(n2), cell(e.lambda.l1), cell(e.lambda.l2),
                     cell(e.lambda.l3), cell(e.phi.z), cell(e.phi.y), cell(e.phi.x), cell(t.losses.f),
                     cell(t.losses.g), cell(t.losses.h), "", "", "", cell(t.report.g_bound)});
        }
        csv.row({"two_step_mean", cell(reps), cell(n1), cell(n2), "", "", "", "", "", "", cell(mean.f), cell(mean.g),
                 cell(mean.h), cell(mean.se_f), cell(mean.se_g), cell(mean.se_h), cell(mean.g_bound)});
        csv.row({"single_step_mean", cell(reps), "", cell(single.shots), "", "", "", "", "", "", cell(base.f),
                 cell(base.g), cell(base.h), cell(base.se_f), cell(base.se_g), cell(base.se_h), cell(base.g_bound)});
    } else {
        json doc = jconfig(cfg);
        doc["command"] = "two-step";
        doc["budget"] = budget;
        doc["split"] = cfg.split;
        doc["stage1_shots"] = n1;
        doc["stage2_shots"] = n2;
        doc["replications"] = json::array();
        for (std::uint64_t r = 0; r < reps; ++r) {
            const TwoStepResult &t = runs[r];
            doc["replications"].push_back({{"replication", r},
                                           {"lambda", jlambda(t.estimate.lambda)},
                                           {"phi", jangles(t.estimate.phi)},
                                           {"stage2_design", jangles(t.stage2_design.input)},
                                           {"f", t.losses.f},
                                           {"g", t.losses.g},
                                           {"h", t.losses.h}});
        }
        doc["two_step"] = jreport(mean);
        doc["single_step"] = jreport(base);
        os << doc.dump(2) << '\n';
    }
    return kExitOk;
}

enum class VerdictFormat { table, csv, json };

/// Runs every acceptance check; exit 1 when any of them fails.
inline int cmd_reproduce(VerdictFormat fmt, std::ostream &os) {
    using namespace detail;
    const std::vector<acceptance::Verdict> verdicts = acceptance::run_all();
    bool all = true;
    for (const auto &v : verdicts) {
        all = all && v.passed;
    }
    switch (fmt) {
    case VerdictFormat::table:
        for (const auto &v : verdicts) {
            os << acceptance::verdict_line(v) << '\n';
        }
        os << (all ? "all criteria passed" : "some criteria FAILED") << '\n';
        break;
    case VerdictFormat::csv: {
        CsvWriter csv(os);
        csv.row({"id", "title", "passed", "seconds", "detail"});
        for (const auto &v : verdicts) {
            csv.row({std::to_string(v.id), v.title, v.passed ? "true" : "false", cell(v.seconds), v.detail});
        }
        break;
    }
    case VerdictFormat::json: {
        json doc = {{"command", "reproduce"}, {"passed", all}, {"criteria", json::array()}};
        for (const auto &v : verdicts) {
            doc["criteria"].push_back(
                {{"id", v.id}, {"title", v.title}, {"passed", v.passed}, {"seconds", v.seconds}, {"detail", v.detail}});
        }
        os << doc.dump(2) << '\n';
        break;
    }
    }
    return all ? kExitOk : kExitAcceptance;
}

// ---------------------------------------------------------------------------
// Entry point

namespace detail {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::uint64_t> trials;
    bool emit_surface = false;
    bool planar = false;
    bool json = false;
};

inline void add_common(CLI::App *sub, Flags &f, bool with_trials) {
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "RNG seed (unsigned 64-bit)");
    sub->add_option("--out", f.out, "output path (default: stdout)");
    sub->add_option("--format", f.format, "report format")->check(CLI::IsMember({"csv", "json"}));
    if (with_trials) {
        sub->add_option("--trials", f.trials, "Monte Carlo trials or replications");
    }
}

inline RunConfig resolve(const Flags &f) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (f.seed) {
        cfg.seed = *f.seed;
    }
    if (f.out) {
        cfg.out = *f.out;
    }
    if (f.format) {
        cfg.format = parse_format(*f.format);
    }
    if (f.trials) {
        cfg.trials = *f.trials;
    }
    cfg.emit_surface = cfg.emit_surface || f.emit_surface;
    cfg.planar = cfg.planar || f.planar;
    return cfg;
}

/// Runs `body` against the configured output stream.
template <class Body>
int with_output(const std::optional<std::string> &path, std::ostream &out, Body &&body) {
    if (!path) {
        return body(out);
    }
    std::ostringstream buffer;
    const int code = body(buffer);
    std::ofstream file(*path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw ConfigError("cannot open output file \"" + *path + "\"");
    }
    file << buffer.str();
    return code;
}

}  // namespace detail

inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    CLI::App app{"Pauli channel tomography: simulation, risk analysis and experiment design", "pauli-tomo"};
    app.require_subcommand(1);
    detail::Flags f;
    CLI::App *simulate = app.add_subcommand("simulate", "simulate measurement records and estimate the channel");
    CLI::App *risk = app.add_subcommand("risk", "analytic and Monte Carlo losses of a design");
    CLI::App *optimize = app.add_subcommand("optimize", "search for the design minimizing the angle risk");
    CLI::App *two_step = app.add_subcommand("two-step", "two-stage adaptive tomography");
    CLI::App *reproduce = app.add_subcommand("reproduce", "run the acceptance checks");
    detail::add_common(simulate, f, true);
    detail::add_common(risk, f, true);
    detail::add_common(optimize, f, false);
    detail::add_common(two_step, f, true);
    optimize->add_flag("--emit-surface", f.emit_surface, "include every grid node in the report");
    optimize->add_flag("--planar", f.planar, "planar designs with lambda3 = 0 known");
    reproduce->add_option("--out", f.out, "output path (default: stdout)");
    reproduce->add_option("--format", f.format, "verdict format")->check(CLI::IsMember({"csv", "json"}));
    reproduce->add_flag("--json", f.json, "machine-readable verdicts (same as --format json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (reproduce->parsed()) {
            VerdictFormat fmt = VerdictFormat::table;
            if (f.json || (f.format && *f.format == "json")) {
                fmt = VerdictFormat::json;
            } else if (f.format) {
                fmt = VerdictFormat::csv;
            }
            return detail::with_output(f.out, out, [&](std::ostream &os) { return cmd_reproduce(fmt, os); });
        }
        const RunConfig cfg = detail::resolve(f);
        auto dispatch = [&](std::ostream &os) {
            if (simulate->parsed()) {
                return cmd_simulate(cfg, os);
            }
            if (risk->parsed()) {
                return cmd_risk(cfg, os);
            }
            if (optimize->parsed()) {
                return cmd_optimize(cfg, os);
            }
            return cmd_two_step(cfg, os);
        };
        return detail::with_output(cfg.out, out, dispatch);
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << '\n';
    } catch (const InvalidArgument &e) {
        err << "error: " << e.what() << '\n';
    } catch (const DegenerateSpectrum &e) {
        err << "error: " << e.what() << '\n';
    } catch (const InvalidState &e) {
        err << "error: " << e.what() << '\n';
    } catch (const json::exception &e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitUsage;
}

}  // namespace pauli_tomo::cli
