// Pipeline orchestration: config parsing with CLI-overridable JSON,
// per-stage file contracts, the end-to-end run with its content-hash
// manifest, and the buffer-distance sweep. Every stage is a pure function
// of its input files plus the config, so running the stages one by one
// produces byte-identical artifacts to a full pipeline run.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "citymine/city_matrix.hpp"
#include "citymine/clustering.hpp"
#include "citymine/embedding.hpp"
#include "citymine/errors.hpp"
#include "citymine/fim.hpp"
#include "citymine/geojson.hpp"
#include "citymine/hash.hpp"
#include "citymine/neighborhood.hpp"
#include "citymine/report.hpp"
#include "citymine/umap.hpp"

namespace citymine {

struct PipelineConfig {
    struct Input {
        std::string city;
        std::filesystem::path path;
    };
    std::vector<Input> inputs;
    std::string code_attribute = "code_2018";
    double buffer_distance_m = 100.0;
    double minsup_relative = 0.10;
    std::string embedding_method = "pca"; // "pca" | "umap"
    UmapParams umap;
    int k_min = 2;
    int k_max = 10;
    std::optional<double> cut_distance;
    std::uint64_t seed = 42;
    std::filesystem::path output_dir; // empty: env CITYMINE_OUT_DIR, then "out"
    ColorMap colors;
    int jobs = 1;
};

inline std::filesystem::path default_output_dir() {
    const char* env = std::getenv("CITYMINE_OUT_DIR");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("out");
}

inline void finalize_output_dir(PipelineConfig& cfg) {
    if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();
}

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown " + where + " key '" + key + "'");
}

inline double as_number(const nlohmann::json& v, const std::string& name) {
    if (!v.is_number()) throw ConfigError("config field '" + name + "' must be a number");
    return v.get<double>();
}

inline int as_int(const nlohmann::json& v, const std::string& name) {
    if (!v.is_number_integer()) throw ConfigError("config field '" + name + "' must be an integer");
    return v.get<int>();
}

inline std::string as_string(const nlohmann::json& v, const std::string& name) {
    if (!v.is_string()) throw ConfigError("config field '" + name + "' must be a string");
    return v.get<std::string>();
}

} // namespace detail

// Relative input/output paths are resolved against `base_dir` (the config
// file's directory).
inline PipelineConfig parse_config_json(const nlohmann::json& j,
                                        const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::require_keys(j,
                         {"inputs", "code_attribute", "buffer_distance_m", "minsup_relative",
                          "embedding", "k_min", "k_max", "cut_distance", "seed", "output_dir",
                          "colors", "jobs"},
                         "config");
    PipelineConfig cfg;
    auto resolve = [&](const std::filesystem::path& p) {
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    if (j.contains("inputs")) {
        if (!j["inputs"].is_array()) throw ConfigError("config field 'inputs' must be an array");
        for (const auto& in : j["inputs"]) {
            if (!in.is_object()) throw ConfigError("each input must be an object");
            detail::require_keys(in, {"city", "path"}, "input");
            if (!in.contains("city") || !in.contains("path"))
                throw ConfigError("each input needs 'city' and 'path'");
            cfg.inputs.push_back({detail::as_string(in["city"], "inputs.city"),
                                  resolve(detail::as_string(in["path"], "inputs.path"))});
        }
    }
    if (j.contains("code_attribute"))
        cfg.code_attribute = detail::as_string(j["code_attribute"], "code_attribute");
    if (j.contains("buffer_distance_m"))
        cfg.buffer_distance_m = detail::as_number(j["buffer_distance_m"], "buffer_distance_m");
    if (j.contains("minsup_relative"))
        cfg.minsup_relative = detail::as_number(j["minsup_relative"], "minsup_relative");
    if (j.contains("embedding")) {
        const auto& e = j["embedding"];
        if (!e.is_object()) throw ConfigError("config field 'embedding' must be an object");
        detail::require_keys(e, {"method", "n_neighbors", "min_dist", "epochs", "learning_rate"},
                             "embedding");
        if (e.contains("method")) cfg.embedding_method = detail::as_string(e["method"], "embedding.method");
        if (e.contains("n_neighbors"))
            cfg.umap.n_neighbors = detail::as_int(e["n_neighbors"], "embedding.n_neighbors");
        if (e.contains("min_dist")) cfg.umap.min_dist = detail::as_number(e["min_dist"], "embedding.min_dist");
        if (e.contains("epochs")) cfg.umap.epochs = detail::as_int(e["epochs"], "embedding.epochs");
        if (e.contains("learning_rate"))
            cfg.umap.learning_rate = detail::as_number(e["learning_rate"], "embedding.learning_rate");
    }
    if (j.contains("k_min")) cfg.k_min = detail::as_int(j["k_min"], "k_min");
    if (j.contains("k_max")) cfg.k_max = detail::as_int(j["k_max"], "k_max");
    if (j.contains("cut_distance") && !j["cut_distance"].is_null())
        cfg.cut_distance = detail::as_number(j["cut_distance"], "cut_distance");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) throw ConfigError("config field 'seed' must be an integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output_dir"))
        cfg.output_dir = resolve(detail::as_string(j["output_dir"], "output_dir"));
    if (j.contains("colors")) {
        const auto& c = j["colors"];
        if (!c.is_object()) throw ConfigError("config field 'colors' must be an object");
        detail::require_keys(c, {"prefixes", "fallback", "ramp_low", "ramp_high"}, "colors");
        if (c.contains("prefixes")) {
            if (!c["prefixes"].is_object()) throw ConfigError("colors.prefixes must be an object");
            cfg.colors.prefixes.clear();
            for (const auto& [prefix, color] : c["prefixes"].items())
                cfg.colors.prefixes.emplace_back(prefix, detail::as_string(color, "colors.prefixes"));
        }
        if (c.contains("fallback")) cfg.colors.fallback = detail::as_string(c["fallback"], "colors.fallback");
        if (c.contains("ramp_low")) cfg.colors.ramp_low = detail::as_string(c["ramp_low"], "colors.ramp_low");
        if (c.contains("ramp_high")) cfg.colors.ramp_high = detail::as_string(c["ramp_high"], "colors.ramp_high");
    }
    if (j.contains("jobs")) cfg.jobs = detail::as_int(j["jobs"], "jobs");
    cfg.umap.seed = cfg.seed;
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config JSON in " + path.string() + ": " + e.what());
    }
    return parse_config_json(j, path.parent_path());
}

inline void validate_config(const PipelineConfig& cfg) {
    if (cfg.inputs.empty()) throw ConfigError("config needs at least one input");
    std::set<std::string> names;
    for (const auto& in : cfg.inputs) {
        if (in.city.empty()) throw ConfigError("input city name must be non-empty");
        if (in.city.find_first_of("/\\") != std::string::npos || in.city == "." || in.city == "..")
            throw ConfigError("input city name must be a plain file-name token: '" + in.city + "'");
        if (!names.insert(in.city).second)
            throw ConfigError("duplicate input city name '" + in.city + "'");
    }
    if (cfg.buffer_distance_m < 0) throw ConfigError("buffer_distance_m must be non-negative");
    if (!(cfg.minsup_relative > 0.0) || cfg.minsup_relative > 1.0)
        throw ConfigError("minsup_relative must be in (0, 1]");
    if (cfg.embedding_method != "pca" && cfg.embedding_method != "umap")
        throw ConfigError("embedding method must be 'pca' or 'umap'");
    if (cfg.k_min < 2 || cfg.k_min > cfg.k_max)
        throw ConfigError("k range must satisfy 2 ≤ k_min ≤ k_max");
    if (cfg.jobs < 1) throw ConfigError("jobs must be ≥ 1");
    cfg.colors.validate();
}

inline std::filesystem::path transactions_path(const PipelineConfig& cfg, const std::string& city) {
    return cfg.output_dir / (city + ".transactions.txt");
}
inline std::filesystem::path dichotomous_path(const PipelineConfig& cfg, const std::string& city) {
    return cfg.output_dir / (city + ".dichotomous.csv");
}
inline std::filesystem::path fis_path(const PipelineConfig& cfg, const std::string& city) {
    return cfg.output_dir / (city + ".fis.csv");
}
inline std::filesystem::path matrix_path(const PipelineConfig& cfg) { return cfg.output_dir / "matrix.csv"; }
inline std::filesystem::path embedding_path(const PipelineConfig& cfg) {
    return cfg.output_dir / "embedding.csv";
}
inline std::filesystem::path distances_path(const PipelineConfig& cfg) {
    return cfg.output_dir / "distances.csv";
}
inline std::filesystem::path dendrogram_path(const PipelineConfig& cfg) {
    return cfg.output_dir / "dendrogram.json";
}
inline std::filesystem::path kselection_path(const PipelineConfig& cfg) {
    return cfg.output_dir / "kselection.csv";
}
inline std::filesystem::path assignment_path(const PipelineConfig& cfg) {
    return cfg.output_dir / "assignment.json";
}
inline std::filesystem::path manifest_path(const PipelineConfig& cfg) {
    return cfg.output_dir / "manifest.json";
}
inline std::filesystem::path sweep_path(const PipelineConfig& cfg) { return cfg.output_dir / "sweep.csv"; }

struct ManifestEntry {
    std::string path;
    std::string stage;
    std::string sha256;
};

namespace stages {

struct StageOutput {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> notes;
};

namespace detail {

inline std::vector<PipelineConfig::Input> sorted_inputs(const PipelineConfig& cfg) {
    auto inputs = cfg.inputs;
    std::sort(inputs.begin(), inputs.end(),
              [](const auto& a, const auto& b) { return a.city < b.city; });
    return inputs;
}

// Fan tasks across up to `jobs` workers. Exceptions are re-thrown in city
// order, enriched with stage and city; notes are delivered in city order.
template <typename Fn>
inline void parallel_over_cities(const std::vector<PipelineConfig::Input>& inputs, int jobs,
                                 const std::string& stage, Fn&& fn) {
    std::size_t n = inputs.size();
    std::vector<std::exception_ptr> errors(n);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
        pool.reserve(count);
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        std::string where = "stage " + stage + ": city '" + inputs[i].city + "': ";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        } catch (const std::exception& e) {
            throw StageError(stage, "city '" + inputs[i].city + "': " + e.what());
        }
    }
}

inline LandUseLayer load_validated_layer(const PipelineConfig& cfg,
                                         const PipelineConfig::Input& input,
                                         std::vector<std::string>* warnings) {
    LandUseLayer layer = load_feature_collection(input.path, cfg.code_attribute, input.city);
    ValidationReport rep = validate_layer(layer);
    if (!rep.ok())
        throw DataError("feature '" + rep.errors[0].first + "': " + rep.errors[0].second);
    if (warnings)
        for (const auto& [id, msg] : rep.warnings)
            warnings->push_back("warning: city '" + input.city + "': feature '" + id + "': " + msg);
    return layer;
}

} // namespace detail

inline StageOutput extract(const PipelineConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    auto inputs = detail::sorted_inputs(cfg);
    std::vector<std::vector<std::string>> notes(inputs.size());
    detail::parallel_over_cities(inputs, cfg.jobs, "extract", [&](std::size_t i) {
        LandUseLayer layer = detail::load_validated_layer(cfg, inputs[i], &notes[i]);
        TransactionSet ts = extract_transactions(layer, cfg.buffer_distance_m);
        export_transactions(ts, transactions_path(cfg, inputs[i].city));
        export_dichotomous(ts, dichotomous_path(cfg, inputs[i].city));
    });
    StageOutput out;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        out.files.push_back(transactions_path(cfg, inputs[i].city));
        out.files.push_back(dichotomous_path(cfg, inputs[i].city));
        for (auto& w : notes[i]) out.notes.push_back(std::move(w));
    }
    return out;
}

inline StageOutput mine(const PipelineConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    auto inputs = detail::sorted_inputs(cfg);
    detail::parallel_over_cities(inputs, cfg.jobs, "mine", [&](std::size_t i) {
        auto lines = read_transactions_text(transactions_path(cfg, inputs[i].city));
        TransactionDatabase db = build_database(lines);
        auto fis = mine_frequent_itemsets(db, {cfg.minsup_relative});
        write_fi_csv(fis, fis_path(cfg, inputs[i].city));
    });
    StageOutput out;
    for (const auto& in : inputs) out.files.push_back(fis_path(cfg, in.city));
    return out;
}

inline StageOutput matrix(const PipelineConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    std::map<std::string, std::vector<FrequentItemset>> results;
    for (const auto& in : cfg.inputs) results[in.city] = read_fi_csv(fis_path(cfg, in.city));
    write_matrix_csv(merge_city_fis(results), matrix_path(cfg));
    return {{matrix_path(cfg)}, {}};
}

inline StageOutput embed(const PipelineConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    CityFIMatrix m = read_matrix_csv(matrix_path(cfg));
    Embedding e;
    if (cfg.embedding_method == "umap") {
        UmapParams params = cfg.umap;
        params.seed = cfg.seed;
        e = umap_embed(m, params);
    } else {
        e = pca_embed(m);
    }
    write_embedding_csv(e, embedding_path(cfg));
    return {{embedding_path(cfg)}, {}};
}

// Height that separates the dendrogram into exactly k parts when drawn.
inline double cut_height_for_k(const Dendrogram& dendro, int k) {
    auto n = static_cast<int>(dendro.leaves.size());
    if (dendro.merges.empty()) return 0.0;
    if (k >= n) return 0.0;
    if (k <= 1) return dendro.merges.back().height * 1.05 + 1e-9;
    double lo = dendro.merges[static_cast<std::size_t>(n - k - 1)].height;
    double hi = dendro.merges[static_cast<std::size_t>(n - k)].height;
    return 0.5 * (lo + hi);
}

inline StageOutput cluster(const PipelineConfig& cfg,
                           const std::optional<std::filesystem::path>& embedding_file = {}) {
    std::filesystem::create_directories(cfg.output_dir);
    Embedding e = read_embedding_csv(embedding_file.value_or(embedding_path(cfg)));
    auto n = static_cast<int>(e.coords.size());
    if (n < 2) throw DataError("clustering needs at least 2 cities");
    DistanceMatrix dist = pairwise_sqeuclidean(e);
    write_distance_csv(dist, distances_path(cfg));
    Dendrogram dendro = ward_linkage(e.coords, e.city_names);
    write_dendrogram_json(dendro, dendrogram_path(cfg));
    if (cfg.k_max > n - 1)
        throw ConfigError("k range [" + std::to_string(cfg.k_min) + ", " + std::to_string(cfg.k_max) +
                          "] is invalid for " + std::to_string(n) + " cities (k_max ≤ n−1)");
    KSelectionReport rep = select_k(dendro, e.coords, cfg.k_min, cfg.k_max);
    write_kselection_csv(rep, kselection_path(cfg));
    ClusterAssignment assignment = cfg.cut_distance ? cut_by_distance(dendro, *cfg.cut_distance)
                                                    : cut_by_k(dendro, rep.chosen_k);
    write_assignment_json(assignment, assignment_path(cfg));
    return {{distances_path(cfg), dendrogram_path(cfg), kselection_path(cfg), assignment_path(cfg)}, {}};
}

inline StageOutput report(const PipelineConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    Embedding e = read_embedding_csv(embedding_path(cfg));
    DistanceMatrix dist = read_distance_csv(distances_path(cfg));
    Dendrogram dendro = read_dendrogram_json(dendrogram_path(cfg));
    ClusterAssignment assignment = read_assignment_json(assignment_path(cfg));

    RenderConfig rc;
    rc.colors = cfg.colors;
    StageOutput out;

    std::vector<std::string> order;
    for (int leaf : dendrogram_leaf_order(dendro))
        order.push_back(dendro.leaves[static_cast<std::size_t>(leaf)]);
    auto write_text = [](const std::filesystem::path& p, const std::string& content) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw DataError("cannot write file: " + p.string());
        f << content;
    };
    write_text(cfg.output_dir / "cities.heatmap.svg", render_heatmap(dist, order, rc));
    out.files.push_back(cfg.output_dir / "cities.heatmap.svg");

    double cut = assignment.cut_distance ? *assignment.cut_distance
                                         : cut_height_for_k(dendro, assignment.k);
    write_text(cfg.output_dir / "cities.dendrogram.svg", render_dendrogram(dendro, cut, rc));
    out.files.push_back(cfg.output_dir / "cities.dendrogram.svg");

    std::map<std::string, std::string> thumbnails;
    auto inputs = detail::sorted_inputs(cfg);
    for (const auto& in : inputs) {
        if (std::find(e.city_names.begin(), e.city_names.end(), in.city) == e.city_names.end())
            continue;
        LandUseLayer layer = detail::load_validated_layer(cfg, in, nullptr);
        std::string thumb = render_city_thumbnail(layer, cfg.colors, 120.0);
        auto path = cfg.output_dir / (in.city + ".thumbnail.svg");
        write_text(path, thumb);
        out.files.push_back(path);
        thumbnails[in.city] = std::move(thumb);
    }

    write_text(cfg.output_dir / "cities.scatter.svg", render_scatter(e, assignment, thumbnails, rc));
    out.files.push_back(cfg.output_dir / "cities.scatter.svg");
    return out;
}

} // namespace stages

inline std::vector<ManifestEntry> run_pipeline(const PipelineConfig& cfg, std::ostream& log) {
    validate_config(cfg);
    std::vector<ManifestEntry> manifest;
    auto add = [&](const stages::StageOutput& so, const char* stage) {
        for (const auto& f : so.files) manifest.push_back({f.filename().string(), stage, sha256_file(f)});
        for (const auto& note : so.notes) log << note << '\n';
    };
    add(stages::extract(cfg), "extract");
    add(stages::mine(cfg), "mine");
    if (cfg.inputs.size() < 2) {
        log << "note: clustering needs at least 2 cities; pipeline stopped after the FI output\n";
    } else {
        add(stages::matrix(cfg), "matrix");
        add(stages::embed(cfg), "embed");
        add(stages::cluster(cfg), "cluster");
        add(stages::report(cfg), "report");
    }
    std::sort(manifest.begin(), manifest.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    nlohmann::json j = nlohmann::json::array();
    for (const auto& entry : manifest)
        j.push_back({{"path", entry.path}, {"stage", entry.stage}, {"sha256", entry.sha256}});
    std::ofstream out(manifest_path(cfg), std::ios::binary);
    if (!out) throw DataError("cannot write file: " + manifest_path(cfg).string());
    out << j.dump(2) << '\n';
    return manifest;
}

struct SweepRow {
    double buffer_distance_m = 0.0;
    std::size_t transaction_count = 0;
    double median_transaction_length = 0.0;
    double mean_transaction_length = 0.0;
    std::size_t fi_count = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

inline std::string sweep_to_csv(const SweepResult& result) {
    std::string out =
        "buffer_distance_m,transaction_count,median_transaction_length,mean_transaction_length,fi_count\n";
    for (const SweepRow& r : result.rows) {
        out += fmt_double(r.buffer_distance_m);
        out += ',';
        out += std::to_string(r.transaction_count);
        out += ',';
        out += fmt_double(r.median_transaction_length);
        out += ',';
        out += fmt_fixed(r.mean_transaction_length, 6);
        out += ',';
        out += std::to_string(r.fi_count);
        out += '\n';
    }
    return out;
}

inline SweepResult run_buffer_sweep(const PipelineConfig& cfg, std::vector<double> distances) {
    validate_config(cfg);
    if (cfg.inputs.size() != 1) throw ConfigError("sweep requires exactly one input city");
    if (distances.empty()) throw ConfigError("sweep requires at least one distance");
    for (double d : distances)
        if (d < 0) throw ConfigError("sweep distances must be non-negative");
    std::sort(distances.begin(), distances.end());
    distances.erase(std::unique(distances.begin(), distances.end()), distances.end());

    std::vector<std::string> notes;
    LandUseLayer layer = stages::detail::load_validated_layer(cfg, cfg.inputs[0], &notes);
    SweepResult result;
    for (double d : distances) {
        TransactionSet ts = extract_transactions(layer, d);
        std::vector<std::vector<std::string>> raw;
        raw.reserve(ts.transactions.size());
        for (const Transaction& t : ts.transactions) raw.push_back(t.items);
        TransactionDatabase db = build_database(raw);
        auto fis = mine_frequent_itemsets(db, {cfg.minsup_relative});
        result.rows.push_back({d, ts.transactions.size(), median_transaction_length(ts),
                               mean_transaction_length(ts), fis.size()});
    }
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream out(sweep_path(cfg), std::ios::binary);
    if (!out) throw DataError("cannot write file: " + sweep_path(cfg).string());
    out << sweep_to_csv(result);
    return result;
}

} // namespace citymine
