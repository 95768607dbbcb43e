#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dyshift/adam.hpp"
#include "dyshift/dynamic_shifting.hpp"
#include "dyshift/pipeline.hpp"
#include "dyshift/scene.hpp"
#include "dyshift/synthgen.hpp"

namespace dyshift {

// Sections of key = value pairs. Parsing is strict: every key must be in
// the schema, otherwise the whole file is rejected.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& section, const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const;

    void check_schema(const std::map<std::string, std::set<std::string>>& schema) const;

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::string origin_;
};

// Every tunable of every subcommand, resolved to concrete values. The
// snapshot serializes back to config syntax so each run report records the
// exact settings in effect.
struct RunConfig {
    SemanticScheme scheme = SemanticScheme::synthetic();
    std::string scheme_name = "synthetic";
    uint64_t seed = 0;
    int jobs = 1;

    // gen
    int gen_scenes = 20;
    SynthConfig synth;

    // cluster
    std::string cluster_algo = "meanshift";
    double bfs_radius = 1.2;
    double dbscan_eps = 1.0;
    int dbscan_min_pts = 4;
    MeanShiftParams meanshift{0.65, 100, 1e-4, -1.0, 1 << 30, 0};
    int min_instance_size = 5;
    std::string model_path;

    // dynshift
    BandwidthBank bank{{0.2, 1.7, 3.2}};
    int iterations = 4;
    double step_scale = 1.0;
    int seed_count = 10000;
    std::vector<int> hidden_sizes{64, 64};
    FinalClusterConfig final_cluster;
    std::string final_algo = "meanshift";

    // train
    int epochs = 20;
    AdamConfig adam;

    // analyze
    int analyze_train_scenes = 60;
    int analyze_epochs = 12;
    std::vector<int> iteration_sweep{1, 2, 3, 4, 5};
    std::vector<std::vector<double>> candidate_sets{
        {0.2, 1.1, 2.0}, {0.2, 1.7, 3.2}, {0.2, 2.1, 4.0}};

    IterationSchedule schedule() const { return IterationSchedule::uniform(iterations, step_scale); }
    TrainConfig train_config() const;
    ClusterAlgoConfig cluster_config(const ModelFile* model) const;

    static RunConfig resolve(const ConfigFile& file);
    std::string to_ini() const;
};

} // namespace dyshift
