#include "dht/cli_commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dht/errors.hpp"
#include "dht/metrics.hpp"
#include "dht/rules.hpp"

#include <json.hpp>

namespace dht {

namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

json bounds_to_json(const BoundsReport& bounds, const ObservationModel& model) {
    json j;
    j["kind"] = bound_kind_name(bounds.kind);
    json per_theta = json::object();
    for (int theta = 0; theta < model.hypothesis_count(); ++theta) {
        if (theta == bounds.true_index) continue;
        per_theta[model.hypotheses.names[theta]] = bounds.per_theta[theta];
    }
    j["per_theta"] = std::move(per_theta);
    j["network"] = bounds.network;
    if (!bounds.warnings.empty()) j["warnings"] = bounds.warnings;
    return j;
}

BoundsReport applicable_bounds(const LoadedConfig& config) {
    const SimulationConfig& sim = config.sim;
    if (sim.rule.kind == RuleKind::Lfrhe || !sim.adversary.empty()) {
        std::vector<int> regular;
        for (int i = 0; i < sim.model.agent_count(); ++i)
            if (!sim.adversary.contains(i)) regular.push_back(i);
        return theoretical_bounds(sim.model, BoundKind::RegularMinSourceKl, nullptr, regular);
    }
    if (sim.schedule.is_static()) {
        const DirectedGraph& g = sim.schedule.graph_at(0);
        return theoretical_bounds(sim.model, BoundKind::PathRestrictedKl, &g);
    }
    return theoretical_bounds(sim.model, BoundKind::BestSourceKl);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

json make_manifest(const LoadedConfig& config, const std::vector<std::uint64_t>& seeds,
                   const std::vector<std::string>& outputs, double wall_seconds,
                   const json& verdicts) {
    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["config_digest"] = config.digest_hex;
    manifest["seeds"] = seeds;
    manifest["outputs"] = outputs;
    manifest["wall_clock_seconds"] = wall_seconds;
    manifest["verdicts"] = verdicts;
    return manifest;
}

}  // namespace

std::string default_out_dir() {
    const char* env = std::getenv("DHT_OUT_DIR");
    return env && *env ? env : ".";
}

std::vector<std::int64_t> decade_grid(std::int64_t horizon) {
    std::vector<std::int64_t> grid;
    for (std::int64_t base = 1; base <= horizon; base *= 10) {
        for (std::int64_t mult : {1, 2, 5}) {
            const std::int64_t t = base * mult;
            if (t >= 1 && t <= horizon) grid.push_back(t);
        }
    }
    if (grid.empty() || grid.back() != horizon) grid.push_back(horizon);
    return grid;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record,
                          const ObservationModel& model) {
    out << "t,agent,hypothesis,mu,pi,q\n";
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const std::int64_t t = record.times[k];
        for (int i = 0; i < record.agent_count; ++i) {
            for (int p = 0; p < record.hypothesis_count; ++p) {
                out << t << ',' << i << ',' << model.hypotheses.names[p] << ',';
                if (!record.log_actual.empty())
                    out << format_double(std::exp(record.log_actual[k].at(i, p)));
                out << ',';
                if (!record.log_local.empty())
                    out << format_double(std::exp(record.log_local[k].at(i, p)));
                out << ',';
                if (t >= 1 && p != record.true_index && !record.log_actual.empty())
                    out << format_double(-record.log_actual[k].at(i, p) / static_cast<double>(t));
                out << '\n';
            }
        }
    }
}

std::string render_certification_text(const CertificationReport& report,
                                      const ObservationModel& model) {
    std::ostringstream out;
    out << "certification mode: " << certify_mode_name(report.spec.mode);
    if (report.spec.mode == CertifyMode::Lfrhe) out << " (f=" << report.spec.max_faulty << ")";
    if (report.spec.mode == CertifyMode::MinRuleTimeVarying)
        out << " (window=" << report.spec.window << ")";
    out << "\n";
    if (report.spec.mode == CertifyMode::MinRuleTimeVarying) {
        out << "connectivity: " << (report.connectivity_ok ? "ok" : "FAIL") << " — "
            << report.connectivity_detail << "\n";
    }
    for (const auto& pair : report.pairs) {
        out << "pair (" << model.hypotheses.names[pair.theta_p] << ", "
            << model.hypotheses.names[pair.theta_q] << "): sources {";
        for (std::size_t k = 0; k < pair.sources.size(); ++k)
            out << (k ? "," : "") << pair.sources[k];
        out << "} " << (pair.holds ? "ok" : "FAIL") << " — " << pair.detail << "\n";
    }
    if (!report.note.empty()) out << "note: " << report.note << "\n";
    out << "verdict: " << (report.pass ? "PASS" : "FAIL") << "\n";
    return out.str();
}

std::string render_certification_json(const CertificationReport& report,
                                      const ObservationModel& model) {
    json j;
    j["mode"] = certify_mode_name(report.spec.mode);
    if (report.spec.mode == CertifyMode::Lfrhe) j["f"] = report.spec.max_faulty;
    if (report.spec.mode == CertifyMode::MinRuleTimeVarying) {
        j["window"] = report.spec.window;
        j["connectivity_ok"] = report.connectivity_ok;
        j["connectivity_detail"] = report.connectivity_detail;
    }
    j["pass"] = report.pass;
    j["partial"] = report.partial;
    if (!report.note.empty()) j["note"] = report.note;
    json pairs = json::array();
    for (const auto& pair : report.pairs) {
        json p;
        p["pair"] = json::array({model.hypotheses.names[pair.theta_p],
                                 model.hypotheses.names[pair.theta_q]});
        p["sources"] = pair.sources;
        p["holds"] = pair.holds;
        p["detail"] = pair.detail;
        if (!pair.witness.empty()) p["witness"] = pair.witness;
        pairs.push_back(std::move(p));
    }
    j["pairs"] = std::move(pairs);
    return j.dump(2);
}

std::string render_run_summary_json(const LoadedConfig& config, const TrajectoryRecord& record) {
    const ObservationModel& model = config.sim.model;
    const int star = record.true_index;
    json summary;
    summary["artifact_version"] = kArtifactVersion;
    summary["config_digest"] = config.digest_hex;
    summary["seed"] = record.seed;
    summary["horizon"] = record.horizon;
    summary["rule"] = rule_kind_name(config.sim.rule.kind);
    summary["true_hypothesis"] = model.hypotheses.names[star];

    json final_mu = json::array();
    json final_q = json::array();
    double min_regular_true = 1.0;
    for (int i = 0; i < record.agent_count; ++i) {
        json mu_row = json::object();
        json q_row = json::object();
        for (int p = 0; p < record.hypothesis_count; ++p) {
            const double mu = std::exp(record.log_actual.back().at(i, p));
            mu_row[model.hypotheses.names[p]] = mu;
            if (p != star)
                q_row[model.hypotheses.names[p]] =
                    -record.log_actual.back().at(i, p) / static_cast<double>(record.horizon);
        }
        if (!record.adversarial[i])
            min_regular_true = std::min(min_regular_true, std::exp(record.log_actual.back().at(i, star)));
        final_mu.push_back(std::move(mu_row));
        final_q.push_back(std::move(q_row));
    }
    summary["final_mu"] = std::move(final_mu);
    summary["final_q"] = std::move(final_q);
    summary["adversarial"] = record.adversarial;
    summary["min_regular_final_true_belief"] = min_regular_true;
    summary["consistent"] = min_regular_true > 0.99;

    const BoundsReport bounds = applicable_bounds(config);
    summary["bounds"] = bounds_to_json(bounds, model);
    const RateReport rates = build_rate_report(record, bounds, config.rate_band);
    json entries = json::array();
    for (const auto& entry : rates.entries) {
        json e;
        e["agent"] = entry.agent;
        e["hypothesis"] = model.hypotheses.names[entry.theta];
        e["final_q"] = entry.final_q;
        e["bound"] = entry.bound;
        e["pass"] = entry.pass;
        entries.push_back(std::move(e));
    }
    summary["rate_report"] = {{"band", rates.band},
                              {"provenance", bound_kind_name(rates.provenance)},
                              {"entries", std::move(entries)},
                              {"all_pass", rates.all_pass}};
    summary["social_learning_rate"] = social_learning_rate(record, 0.2, true);
    summary["final_tv_error_regular"] = tv_error(record, record.horizon, true);

    if (config.sim.schedule.is_static() && config.sim.schedule.graph_at(0).is_symmetric()) {
        const auto weights = lazy_metropolis_weights(config.sim.schedule.graph_at(0));
        const auto reference = baseline_reference_rates(model, weights);
        json ref = json::object();
        for (int p = 0; p < record.hypothesis_count; ++p) {
            if (p == star) continue;
            ref[model.hypotheses.names[p]] = reference[p];
        }
        summary["baseline_reference_rates"] = std::move(ref);
    }
    return summary.dump(2);
}

int cmd_check(const std::string& config_path, const std::optional<std::string>& json_out,
              std::ostream& out, std::ostream& err) {
    try {
        const LoadedConfig config = load_config_file(config_path);
        const CertificationReport report =
            certify(config.sim.model, config.sim.schedule, config.certify_spec());
        out << render_certification_text(report, config.sim.model);
        if (json_out) write_file(*json_out, render_certification_json(report, config.sim.model));
        return report.pass ? kExitOk : kExitCertificationFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_run(const std::string& config_path, const RunCommandOptions& options, std::ostream& out,
            std::ostream& err) {
    try {
        LoadedConfig config = load_config_file(config_path);
        if (options.stride) config.sim.record.stride = *options.stride;
        if (options.seed) config.sim.seed = *options.seed;

        const auto started = std::chrono::steady_clock::now();
        try {
            const CertificationReport report =
                certify(config.sim.model, config.sim.schedule, config.certify_spec());
            if (!report.pass)
                out << "warning: structural certification failed; simulating anyway\n"
                    << render_certification_text(report, config.sim.model);
        } catch (const std::exception& e) {
            out << "warning: certification unavailable (" << e.what() << ")\n";
        }

        const TrajectoryRecord record = run(config.sim);
        const std::filesystem::path dir(options.out_dir);
        std::filesystem::create_directories(dir);
        const std::string tag = "seed" + std::to_string(record.seed);

        const auto csv_path = dir / ("trajectory_" + tag + ".csv");
        {
            std::ofstream csv(csv_path);
            if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
            write_trajectory_csv(csv, record, config.sim.model);
        }
        const auto summary_path = dir / ("summary_" + tag + ".json");
        const std::string summary = render_run_summary_json(config, record);
        write_file(summary_path, summary);

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const json summary_json = json::parse(summary);
        json verdicts;
        verdicts["consistent"] = summary_json["consistent"];
        verdicts["rate_report_all_pass"] = summary_json["rate_report"]["all_pass"];
        const auto manifest_path = dir / ("manifest_run_" + tag + ".json");
        write_file(manifest_path,
                   make_manifest(config, {record.seed},
                                 {csv_path.string(), summary_path.string()}, wall, verdicts)
                       .dump(2));

        out << "wrote " << csv_path.string() << "\n";
        out << "wrote " << summary_path.string() << "\n";
        out << "wrote " << manifest_path.string() << "\n";
        out << "final min regular belief on " << summary_json["true_hypothesis"].get<std::string>()
            << ": " << summary_json["min_regular_final_true_belief"].dump() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_sweep(const std::string& config_path, const SweepCommandOptions& options, std::ostream& out,
              std::ostream& err) {
    try {
        if (options.seed_end < options.seed_begin)
            throw std::invalid_argument("--seeds: end must be >= begin");
        LoadedConfig config = load_config_file(config_path);

        std::vector<std::uint64_t> seeds;
        for (std::uint64_t s = options.seed_begin; s <= options.seed_end; ++s) seeds.push_back(s);
        std::vector<std::int64_t> grid =
            options.grid.empty() ? decade_grid(config.sim.horizon) : options.grid;

        const auto started = std::chrono::steady_clock::now();
        const auto summaries = sweep(config.sim, seeds, grid);

        const std::filesystem::path dir(options.out_dir);
        std::filesystem::create_directories(dir);
        const ObservationModel& model = config.sim.model;
        const int star = model.hypotheses.true_index;
        std::vector<std::string> outputs;

        for (const auto& summary : summaries) {
            json j;
            j["seed"] = summary.seed;
            j["config_digest"] = config.digest_hex;
            double min_regular_true = 1.0;
            json final_mu = json::array();
            json final_q = json::array();
            for (int i = 0; i < model.agent_count(); ++i) {
                json mu_row = json::object();
                json q_row = json::object();
                for (int p = 0; p < model.hypothesis_count(); ++p) {
                    mu_row[model.hypotheses.names[p]] = std::exp(summary.final_log_actual.at(i, p));
                    if (p != star)
                        q_row[model.hypotheses.names[p]] =
                            -summary.final_log_actual.at(i, p) / static_cast<double>(config.sim.horizon);
                }
                if (!summary.adversarial[i])
                    min_regular_true =
                        std::min(min_regular_true, std::exp(summary.final_log_actual.at(i, star)));
                final_mu.push_back(std::move(mu_row));
                final_q.push_back(std::move(q_row));
            }
            j["final_mu"] = std::move(final_mu);
            j["final_q"] = std::move(final_q);
            j["min_regular_final_true_belief"] = min_regular_true;
            j["consistent"] = min_regular_true > 0.99;
            j["signal_digest"] = summary.signal_digest;
            const auto path = dir / ("sweep_seed" + std::to_string(summary.seed) + ".json");
            write_file(path, j.dump(2));
            outputs.push_back(path.string());
        }

        // Aggregate exceedance curves, one per false hypothesis.
        const std::string range =
            std::to_string(options.seed_begin) + "_" + std::to_string(options.seed_end);
        const auto exceedance_path = dir / ("exceedance_" + range + ".csv");
        {
            std::ofstream csv(exceedance_path);
            if (!csv) throw std::runtime_error("cannot write " + exceedance_path.string());
            csv << "t,hypothesis,exceedance,epsilon,best_kl,reference_rate\n";
            for (int theta = 0; theta < model.hypothesis_count(); ++theta) {
                if (theta == star) continue;
                double best_kl = 0.0;
                for (int v : source_set(model, star, theta))
                    best_kl = std::max(best_kl, kl_divergence(model.agents[v].row(star),
                                                              model.agents[v].row(theta)));
                if (!(best_kl > 0.0)) continue;
                const double epsilon = config.probe_epsilon.value_or(best_kl / 2.0);
                if (summaries.size() < 50) {
                    out << "note: exceedance probe needs >= 50 seeds, got " << summaries.size()
                        << "; curve omitted\n";
                    break;
                }
                const auto curve =
                    concentration_probe(summaries, model, config.probe_agent, theta, epsilon);
                for (std::size_t k = 0; k < curve.times.size(); ++k) {
                    csv << curve.times[k] << ',' << model.hypotheses.names[theta] << ','
                        << format_double(curve.exceedance[k]) << ',' << format_double(curve.epsilon)
                        << ',' << format_double(curve.best_kl) << ','
                        << format_double(curve.reference_rate) << '\n';
                }
            }
        }
        outputs.push_back(exceedance_path.string());

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        int consistent_count = 0;
        for (const auto& summary : summaries) {
            double min_regular_true = 1.0;
            for (int i = 0; i < model.agent_count(); ++i)
                if (!summary.adversarial[i])
                    min_regular_true =
                        std::min(min_regular_true, std::exp(summary.final_log_actual.at(i, star)));
            if (min_regular_true > 0.99) ++consistent_count;
        }
        json verdicts;
        verdicts["consistent_runs"] = consistent_count;
        verdicts["total_runs"] = summaries.size();
        const auto manifest_path = dir / ("manifest_sweep_" + range + ".json");
        write_file(manifest_path, make_manifest(config, seeds, outputs, wall, verdicts).dump(2));

        out << "swept seeds " << options.seed_begin << ".." << options.seed_end << ": "
            << consistent_count << "/" << summaries.size() << " consistent\n";
        out << "wrote " << manifest_path.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_rates(const std::string& config_path, const std::optional<std::string>& json_out,
              std::ostream& out, std::ostream& err) {
    try {
        const LoadedConfig config = load_config_file(config_path);
        const ObservationModel& model = config.sim.model;
        const int star = model.hypotheses.true_index;
        json j;
        j["true_hypothesis"] = model.hypotheses.names[star];

        const auto best = theoretical_bounds(model, BoundKind::BestSourceKl);
        j["best_source"] = bounds_to_json(best, model);

        std::optional<BoundsReport> path_restricted;
        if (config.sim.schedule.is_static()) {
            const DirectedGraph& g = config.sim.schedule.graph_at(0);
            path_restricted = theoretical_bounds(model, BoundKind::PathRestrictedKl, &g);
            j["path_restricted"] = bounds_to_json(*path_restricted, model);
        }
        std::optional<BoundsReport> regular_min;
        if (!config.sim.adversary.empty() || config.sim.rule.kind == RuleKind::Lfrhe) {
            std::vector<int> regular;
            for (int i = 0; i < model.agent_count(); ++i)
                if (!config.sim.adversary.contains(i)) regular.push_back(i);
            regular_min = theoretical_bounds(model, BoundKind::RegularMinSourceKl, nullptr, regular);
            j["regular_min_source"] = bounds_to_json(*regular_min, model);
        }
        std::optional<std::vector<double>> reference;
        if (config.sim.schedule.is_static() && config.sim.schedule.graph_at(0).is_symmetric()) {
            reference =
                baseline_reference_rates(model, lazy_metropolis_weights(config.sim.schedule.graph_at(0)));
            json ref = json::object();
            for (int p = 0; p < model.hypothesis_count(); ++p) {
                if (p == star) continue;
                ref[model.hypotheses.names[p]] = (*reference)[p];
            }
            j["baseline_reference"] = std::move(ref);
        }

        out << "rate bounds (nats/step), true hypothesis " << model.hypotheses.names[star] << ":\n";
        char line[256];
        std::snprintf(line, sizeof line, "  %-12s %14s %16s %20s %14s\n", "hypothesis",
                      "best_source", "path_restricted", "regular_min_source", "baseline_ref");
        out << line;
        auto cell = [](const std::optional<double>& value) {
            if (!value) return std::string("-");
            char buffer[32];
            std::snprintf(buffer, sizeof buffer, "%.6f", *value);
            return std::string(buffer);
        };
        for (int theta = 0; theta < model.hypothesis_count(); ++theta) {
            if (theta == star) continue;
            std::optional<double> path_value, regular_value, ref_value;
            if (path_restricted) path_value = path_restricted->per_theta[theta];
            if (regular_min) regular_value = regular_min->per_theta[theta];
            if (reference) ref_value = (*reference)[theta];
            std::snprintf(line, sizeof line, "  %-12s %14.6f %16s %20s %14s\n",
                          model.hypotheses.names[theta].c_str(), best.per_theta[theta],
                          cell(path_value).c_str(), cell(regular_value).c_str(),
                          cell(ref_value).c_str());
            out << line;
        }
        for (const auto& warning : best.warnings) out << "  warning: " << warning << "\n";

        if (json_out) write_file(*json_out, j.dump(2));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace dht
