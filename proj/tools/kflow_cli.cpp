// SPDX-License-Identifier: Apache-2.0
//
// kflow: kernel scene-flow estimation from the command line.
//
//   kflow estimate   --source a.pcf --target b.pcf --flow-out f.pcf [...]
//   kflow benchmark  --manifest m.json --out report.json [...]
//   kflow synth      --out-dir dir [--seed N --objects K --noise S ...]
//   kflow export-viz --points a.pcf --flow f.pcf --out a.ply
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kflow/io.hpp"
#include "kflow/pipeline.hpp"
#include "kflow/synth.hpp"

namespace {

using kflow::RunConfig;

// CLI flags > config file > defaults.
struct ConfigFlags {
    std::string config_path;
    nlohmann::json overrides = nlohmann::json::object();

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        auto opt_str = [&](const char* flag, const char* key, const char* desc) {
            cmd->add_option_function<std::string>(
                flag, [this, key](const std::string& v) { overrides[key] = v; }, desc);
        };
        auto opt_num = [&](const char* flag, const char* key, const char* desc) {
            cmd->add_option_function<double>(
                flag, [this, key](double v) { overrides[key] = v; }, desc);
        };
        auto opt_int = [&](const char* flag, const char* key, const char* desc) {
            cmd->add_option_function<std::uint64_t>(
                flag, [this, key](std::uint64_t v) { overrides[key] = v; }, desc);
        };
        opt_str("--embedding", "embedding", "identity|rff|peat|peat-knn");
        opt_str("--kernel", "kernel", "rbf|sinc|softmax|sigmoid|tanh|laplacian");
        opt_str("--loss", "loss", "chamfer|chamfer-bi|dt");
        opt_str("--support", "support", "grid|target-points");
        opt_num("--sigma", "sigma", "kernel scale (<=0 selects a default)");
        opt_num("--rff-beta", "rff_beta", "RFF bandwidth");
        opt_int("--rff-dim", "rff_dim", "RFF output dimension (even)");
        opt_str("--peat-weights", "peat_weights_path", "PEAT weight file");
        opt_int("--peat-knn", "peat_knn", "attention neighborhood size");
        opt_num("--support-spacing", "support_spacing", "grid spacing in meters");
        opt_int("--support-max-per-axis", "support_max_per_axis", "grid count clamp");
        opt_num("--support-padding", "support_padding", "grid box padding");
        opt_num("--dt-spacing", "dt_spacing", "DT voxel spacing in meters");
        opt_num("--dt-padding", "dt_padding", "DT box padding");
        opt_num("--lr", "learning_rate", "Adam learning rate");
        opt_int("--iters", "max_iters", "max optimization iterations");
        opt_num("--lambda", "lambda_l1", "L1 regularization weight");
        opt_int("--patience", "early_stop_patience", "early-stop patience");
        opt_int("--seed", "seed", "PRNG seed");
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw CLI::ValidationError("--config", "cannot open " + config_path);
            nlohmann::json j;
            f >> j;
            cfg.merge_json(j);
        }
        cfg.merge_json(overrides);
        cfg.validate();
        return cfg;
    }
};

int cmd_estimate(const std::string& source_path, const std::string& target_path,
                 const std::string& flow_out, const std::string& gt_path,
                 const std::string& trace_out, const std::string& report_out,
                 const ConfigFlags& flags) {
    RunConfig cfg = flags.resolve();
    kflow::PointCloud source = kflow::io::read_points(source_path);
    kflow::PointCloud target = kflow::io::read_points(target_path);

    kflow::EstimateResult res = kflow::estimate_pair(source, target, cfg);
    kflow::io::write_flow(flow_out, res.flow);

    if (!trace_out.empty()) {
        std::ofstream f(trace_out);
        for (const auto& r : res.trace.records) {
            f << nlohmann::json{{"iteration", r.iteration},
                                {"data_loss", r.data_loss},
                                {"l1_term", r.l1_term},
                                {"total", r.total},
                                {"wall_ms", r.wall_ms}}
                     .dump()
              << '\n';
        }
    }

    nlohmann::json report{{"config", cfg.to_json()},
                          {"points", source.size()},
                          {"supports", res.support_count},
                          {"iterations", res.trace.records.size()},
                          {"stop_reason", res.trace.stop_reason},
                          {"time_s", res.time_s}};
    if (!res.trace.records.empty()) {
        report["initial_loss"] = res.trace.records.front().total;
        report["final_loss"] = res.trace.records.back().total;
    }
    if (!gt_path.empty()) {
        kflow::FlowField gt = kflow::io::read_flow(gt_path);
        kflow::MetricReport m = kflow::compute_metrics(res.flow, gt, res.time_s);
        report["metrics"] = {{"epe_m", m.epe_m},
                             {"acc5_pct", m.acc5_pct},
                             {"acc10_pct", m.acc10_pct},
                             {"angle_rad", m.angle_rad},
                             {"time_s", m.time_s}};
    }
    std::string dumped = report.dump(2);
    if (report_out.empty()) {
        std::cout << dumped << std::endl;
    } else {
        std::ofstream f(report_out);
        f << dumped << '\n';
    }
    return 0;
}

int cmd_benchmark(const std::string& manifest_path, const std::string& out_path,
                  const ConfigFlags& flags) {
    RunConfig cfg = flags.resolve();
    auto entries = kflow::io::read_manifest(manifest_path);
    std::vector<kflow::BenchmarkSample> samples;
    for (const auto& e : entries) {
        samples.push_back({e.id, e.source, e.target, e.gt_flow});
    }
    nlohmann::json report = kflow::run_benchmark(samples, cfg);
    std::string dumped = report.dump(2);
    if (out_path.empty()) {
        std::cout << dumped << std::endl;
    } else {
        std::ofstream f(out_path);
        f << dumped << '\n';
    }
    return 0;
}

int cmd_synth(const std::string& out_dir, std::uint64_t seed, std::size_t objects,
              double noise, std::size_t background, const std::string& sample_id) {
    kflow::SceneSpec spec = kflow::SceneSpec::default_scene(seed);
    spec.background_count = background;
    spec.noise_sigma = noise;
    if (objects < spec.objects.size()) spec.objects.resize(objects);
    kflow::ScenePair pair = kflow::generate(spec);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::string id = sample_id.empty() ? ("synth-" + std::to_string(seed)) : sample_id;
    std::string src = id + "-source.pcf";
    std::string tgt = id + "-target.pcf";
    std::string flw = id + "-gt.pcf";
    kflow::io::write_points((fs::path(out_dir) / src).string(), pair.source);
    kflow::io::write_points((fs::path(out_dir) / tgt).string(), pair.target);
    kflow::io::write_flow((fs::path(out_dir) / flw).string(), pair.gt_flow);

    std::string manifest = (fs::path(out_dir) / "manifest.json").string();
    std::vector<kflow::io::ManifestEntry> entries;
    if (fs::exists(manifest)) entries = kflow::io::read_manifest(manifest);
    // Manifest keeps paths relative to its own directory.
    for (auto& e : entries) {
        e.source = fs::path(e.source).filename().string();
        e.target = fs::path(e.target).filename().string();
        if (e.gt_flow) e.gt_flow = fs::path(*e.gt_flow).filename().string();
    }
    entries.push_back({id, src, tgt, flw});
    kflow::io::write_manifest(manifest, entries);
    std::cout << "wrote " << id << " (" << pair.source.size() << " points) to " << out_dir
              << std::endl;
    return 0;
}

int cmd_export_viz(const std::string& points_path, const std::string& flow_path,
                   const std::string& out_path) {
    kflow::PointCloud cloud = kflow::io::read_points(points_path);
    kflow::FlowField flow = kflow::io::read_flow(flow_path);
    kflow::io::export_ply(out_path, cloud, flow);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel scene-flow estimation"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate flow for one scene pair");
    std::string source_path, target_path, flow_out, gt_path, trace_out, report_out;
    est->add_option("--source", source_path, "source point file")->required();
    est->add_option("--target", target_path, "target point file")->required();
    est->add_option("--flow-out", flow_out, "predicted flow output path")->required();
    est->add_option("--gt", gt_path, "ground-truth flow (adds metrics to the report)");
    est->add_option("--trace-out", trace_out, "per-iteration trace (JSON lines)");
    est->add_option("--report-out", report_out, "run report path (default: stdout)");
    ConfigFlags est_flags;
    est_flags.attach(est);

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "Run a manifest of scene pairs");
    std::string manifest_path, bench_out;
    bench->add_option("--manifest", manifest_path, "manifest JSON")->required();
    bench->add_option("--out", bench_out, "report path (default: stdout)");
    ConfigFlags bench_flags;
    bench_flags.attach(bench);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene pair");
    std::string out_dir, sample_id;
    std::uint64_t synth_seed = 0;
    std::size_t objects = 2, background = 10000;
    double noise = 0.0;
    synth->add_option("--out-dir", out_dir, "output directory")->required();
    synth->add_option("--seed", synth_seed, "generation seed");
    synth->add_option("--objects", objects, "number of moving objects (0-2)");
    synth->add_option("--noise", noise, "target noise sigma in meters");
    synth->add_option("--background", background, "background point count");
    synth->add_option("--id", sample_id, "sample id (default: synth-<seed>)");

    // export-viz
    auto* viz = app.add_subcommand("export-viz", "Write a flow-colored PLY");
    std::string viz_points, viz_flow, viz_out;
    viz->add_option("--points", viz_points, "point file")->required();
    viz->add_option("--flow", viz_flow, "flow file")->required();
    viz->add_option("--out", viz_out, "output PLY path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (est->parsed()) {
            return cmd_estimate(source_path, target_path, flow_out, gt_path, trace_out,
                                report_out, est_flags);
        }
        if (bench->parsed()) return cmd_benchmark(manifest_path, bench_out, bench_flags);
        if (synth->parsed()) {
            return cmd_synth(out_dir, synth_seed, objects, noise, background, sample_id);
        }
        if (viz->parsed()) return cmd_export_viz(viz_points, viz_flow, viz_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 2;
}
