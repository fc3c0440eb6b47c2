// citymine command-line tool: stage subcommands plus the full pipeline
// and the buffer-distance sweep. Exit codes: 0 ok, 2 config error,
// 3 data error, 4 stage failure.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citymine/pipeline.hpp"
#include "citymine/synthetic.hpp"

namespace {

using namespace citymine;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> buffer_distance;
    std::optional<double> minsup;
    std::optional<std::string> embedding;
    std::optional<double> cut_distance;
    std::optional<int> k_min;
    std::optional<int> k_max;
    std::optional<int> jobs;
    std::optional<std::string> out_dir;
};

void add_override_flags(CLI::App* cmd, Overrides& o, bool with_embedding = true) {
    cmd->add_option("--seed", o.seed, "Override the global seed");
    cmd->add_option("--buffer-distance", o.buffer_distance, "Override buffer distance (map units)");
    cmd->add_option("--minsup", o.minsup, "Override relative minimum support in (0, 1]");
    if (with_embedding)
        cmd->add_option("--embedding", o.embedding, "Override embedding method (pca | umap)");
    cmd->add_option("--cut-distance", o.cut_distance, "Cut the dendrogram at this height");
    cmd->add_option("--k-min", o.k_min, "Smallest candidate cluster count");
    cmd->add_option("--k-max", o.k_max, "Largest candidate cluster count");
    cmd->add_option("--jobs", o.jobs, "Parallel workers for per-city stages");
    cmd->add_option("--out-dir", o.out_dir, "Override the output directory");
}

void apply_overrides(PipelineConfig& cfg, const Overrides& o) {
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.umap.seed = *o.seed;
    }
    if (o.buffer_distance) cfg.buffer_distance_m = *o.buffer_distance;
    if (o.minsup) cfg.minsup_relative = *o.minsup;
    if (o.embedding) cfg.embedding_method = *o.embedding;
    if (o.cut_distance) cfg.cut_distance = *o.cut_distance;
    if (o.k_min) cfg.k_min = *o.k_min;
    if (o.k_max) cfg.k_max = *o.k_max;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.out_dir) cfg.output_dir = *o.out_dir;
}

PipelineConfig make_config(const std::string& config_path, const Overrides& o) {
    PipelineConfig cfg = load_config(config_path);
    apply_overrides(cfg, o);
    finalize_output_dir(cfg);
    validate_config(cfg);
    return cfg;
}

void print_stage_output(const stages::StageOutput& out) {
    for (const auto& note : out.notes) std::cerr << note << '\n';
    for (const auto& f : out.files) std::cout << "wrote " << f.string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"citymine: mine land-use co-location itemsets and cluster cities by their profiles"};
    app.require_subcommand(1);

    Overrides o;
    std::string config_path;
    std::string transactions_file;
    std::string embedding_file;
    std::string out_file;
    std::string out_dir;
    std::optional<std::uint64_t> minsup_abs;
    std::vector<double> distances;
    std::uint64_t synth_seed = 42;

    auto* extract = app.add_subcommand("extract", "Ingest GeoJSON and export neighborhood transactions");
    extract->add_option("--config", config_path, "Pipeline config JSON")->required();
    add_override_flags(extract, o);

    auto* mine = app.add_subcommand("mine", "Mine frequent itemsets from transaction files");
    mine->add_option("--config", config_path, "Pipeline config JSON (per-city stage mode)");
    mine->add_option("--transactions", transactions_file, "Single transactions text file (file mode)");
    mine->add_option("--out", out_file, "FI CSV path (file mode)");
    mine->add_option("--minsup-abs", minsup_abs, "Absolute minimum support count (file mode)");
    add_override_flags(mine, o);

    auto* matrix = app.add_subcommand("matrix", "Merge per-city FI CSVs into the city × FI matrix");
    matrix->add_option("--config", config_path, "Pipeline config JSON")->required();
    add_override_flags(matrix, o);

    auto* embed = app.add_subcommand("embed", "Embed the city × FI matrix into 2-D");
    embed->add_option("--config", config_path, "Pipeline config JSON")->required();
    add_override_flags(embed, o);

    auto* cluster = app.add_subcommand("cluster", "Ward clustering, k selection, and the cut");
    cluster->add_option("--config", config_path, "Pipeline config JSON (stage mode)");
    cluster->add_option("--embedding", embedding_file, "Embedding CSV (file mode)")
        ->excludes("--config");
    add_override_flags(cluster, o, /*with_embedding=*/false);

    auto* report = app.add_subcommand("report", "Render heatmap, dendrogram, scatter, and thumbnails");
    report->add_option("--config", config_path, "Pipeline config JSON")->required();
    add_override_flags(report, o);

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end and write the manifest");
    pipeline->add_option("--config", config_path, "Pipeline config JSON")->required();
    add_override_flags(pipeline, o);

    auto* sweep = app.add_subcommand("sweep", "Transaction/FI statistics across buffer distances");
    sweep->add_option("--config", config_path, "Pipeline config JSON (single input)")->required();
    sweep->add_option("--distances", distances, "Buffer distances to evaluate")
        ->required()
        ->delimiter(',');
    add_override_flags(sweep, o);

    auto* synth = app.add_subcommand("synth", "Write the bundled 6-city synthetic demo dataset");
    synth->add_option("--out-dir", out_dir, "Directory for the demo bundle")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*extract) {
            print_stage_output(stages::extract(make_config(config_path, o)));
        } else if (*mine) {
            if (config_path.empty() == transactions_file.empty())
                throw ConfigError("mine needs exactly one of --config or --transactions");
            if (!config_path.empty()) {
                print_stage_output(stages::mine(make_config(config_path, o)));
            } else {
                if (out_file.empty()) throw ConfigError("mine --transactions needs --out");
                TransactionDatabase db = build_database(read_transactions_text(transactions_file));
                std::vector<FrequentItemset> fis;
                if (minsup_abs) {
                    fis = mine_frequent_itemsets_abs(db, *minsup_abs);
                } else {
                    MiningParams params;
                    if (o.minsup) params.minsup_relative = *o.minsup;
                    if (!(params.minsup_relative > 0.0) || params.minsup_relative > 1.0)
                        throw ConfigError("minsup_relative must be in (0, 1]");
                    fis = mine_frequent_itemsets(db, params);
                }
                write_fi_csv(fis, out_file);
                std::cout << "wrote " << out_file << " (" << fis.size() << " itemsets)\n";
            }
        } else if (*matrix) {
            print_stage_output(stages::matrix(make_config(config_path, o)));
        } else if (*embed) {
            print_stage_output(stages::embed(make_config(config_path, o)));
        } else if (*cluster) {
            if (config_path.empty() == embedding_file.empty())
                throw ConfigError("cluster needs exactly one of --config or --embedding");
            if (!config_path.empty()) {
                print_stage_output(stages::cluster(make_config(config_path, o)));
            } else {
                PipelineConfig cfg;
                Embedding e = read_embedding_csv(embedding_file);
                auto n = static_cast<int>(e.coords.size());
                cfg.k_max = o.k_max ? *o.k_max : std::min(10, n - 1);
                cfg.k_min = o.k_min ? *o.k_min : std::min(2, cfg.k_max);
                if (o.cut_distance) cfg.cut_distance = *o.cut_distance;
                cfg.output_dir = o.out_dir ? std::filesystem::path(*o.out_dir) : default_output_dir();
                print_stage_output(stages::cluster(cfg, std::filesystem::path(embedding_file)));
            }
        } else if (*report) {
            print_stage_output(stages::report(make_config(config_path, o)));
        } else if (*pipeline) {
            PipelineConfig cfg = make_config(config_path, o);
            auto manifest = run_pipeline(cfg, std::cout);
            std::cout << "wrote " << manifest.size() << " artifacts; manifest: "
                      << manifest_path(cfg).string() << '\n';
        } else if (*sweep) {
            PipelineConfig cfg = make_config(config_path, o);
            SweepResult result = run_buffer_sweep(cfg, distances);
            std::cout << "wrote " << sweep_path(cfg).string() << " (" << result.rows.size()
                      << " rows)\n";
        } else if (*synth) {
            DemoBundle bundle = write_demo_bundle(out_dir, synth_seed);
            std::cout << "wrote demo bundle: " << bundle.config_path.string() << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const StageError& e) {
        std::cerr << "stage failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
