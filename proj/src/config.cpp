#include "dyshift/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dyshift {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"common", {"scheme", "seed", "jobs"}},
        {"gen",
         {"scenes", "min_distance", "max_distance", "density_decay", "reference_distance",
          "strip_anisotropy", "offset_noise_scale", "ground_points", "sensor_height",
          "min_points_per_instance", "vehicle_count", "cyclist_count", "pedestrian_groups",
          "pedestrian_spacing_min", "pedestrian_spacing_max"}},
        {"cluster",
         {"algo", "bandwidth", "max_iters", "convergence_tol", "merge_radius", "seed_count",
          "bfs_radius", "dbscan_eps", "dbscan_min_pts", "min_instance_size", "model"}},
        {"dynshift",
         {"candidates", "iterations", "step_scale", "seed_count", "hidden", "final_algo",
          "final_bandwidth", "final_radius"}},
        {"train", {"epochs", "lr", "beta1", "beta2", "epsilon"}},
        {"eval", {}},
        {"analyze",
         {"train_scenes", "epochs", "iteration_sweep", "candidates_a", "candidates_b",
          "candidates_c"}},
    };
    return s;
}

} // namespace

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cf;
    cf.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                            ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                            ": empty section name");
            }
            cf.values_[section]; // a section may be present but empty
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        }
        if (section.empty()) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": key outside any section");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        cf.values_[section][key] = value;
    }
    cf.check_schema(schema());
    return cf;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

void ConfigFile::check_schema(const std::map<std::string, std::set<std::string>>& valid) const {
    for (const auto& [section, keys] : values_) {
        auto it = valid.find(section);
        if (it == valid.end()) {
            throw std::invalid_argument(origin_ + ": unknown section [" + section + "]");
        }
        for (const auto& [key, value] : keys) {
            (void)value;
            if (!it->second.count(key)) {
                throw std::invalid_argument(origin_ + ": unknown key '" + key + "' in [" +
                                            section + "]");
            }
        }
    }
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = values_.find(section);
    return it != values_.end() && it->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    auto it = values_.find(section);
    if (it == values_.end()) return fallback;
    auto kit = it->second.find(key);
    return kit == it->second.end() ? fallback : kit->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number for " + section + "." + key + ": '" + v + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("bad number for " + section + "." + key + ": '" + v + "'");
    }
    return out;
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    double d = get_double(section, key, static_cast<double>(fallback));
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
        throw std::invalid_argument(section + "." + key + " must be an integer");
    }
    return i;
}

uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                             uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    try {
        size_t pos = 0;
        uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad unsigned integer for " + section + "." + key + ": '" +
                                    v + "'");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("bad boolean for " + section + "." + key + ": '" + v + "'");
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key,
                                         const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    std::istringstream in(get(section, key, ""));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("bad list entry for " + section + "." + key + ": '" +
                                        item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument(section + "." + key + " is an empty list");
    return out;
}

std::vector<int> ConfigFile::get_int_list(const std::string& section, const std::string& key,
                                          const std::vector<int>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<int> out;
    for (double d : get_list(section, key, {})) {
        int i = static_cast<int>(d);
        if (static_cast<double>(i) != d) {
            throw std::invalid_argument(section + "." + key + " must contain integers");
        }
        out.push_back(i);
    }
    return out;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.adam = adam;
    tc.seed = seed;
    tc.seed_count = seed_count;
    tc.schedule = schedule();
    tc.bank = bank;
    tc.hidden_sizes = hidden_sizes;
    return tc;
}

ClusterAlgoConfig RunConfig::cluster_config(const ModelFile* model) const {
    ClusterAlgoConfig cc;
    cc.algo = algo_from_name(cluster_algo);
    cc.bfs_radius = bfs_radius;
    cc.dbscan_eps = dbscan_eps;
    cc.dbscan_min_pts = dbscan_min_pts;
    cc.meanshift = meanshift;
    cc.model = model;
    cc.final_cluster = final_cluster;
    cc.ds_seed_count = seed_count;
    cc.ds_seed = seed;
    cc.min_instance_size = min_instance_size;
    return cc;
}

RunConfig RunConfig::resolve(const ConfigFile& file) {
    RunConfig rc;

    rc.scheme_name = file.get("common", "scheme", "synthetic");
    if (rc.scheme_name == "synthetic") {
        rc.scheme = SemanticScheme::synthetic();
    } else if (rc.scheme_name == "semantic-kitti") {
        rc.scheme = SemanticScheme::semantic_kitti();
    } else {
        rc.scheme = SemanticScheme::from_file(rc.scheme_name);
    }
    rc.scheme.validate();
    rc.seed = file.get_u64("common", "seed", rc.seed);
    rc.jobs = file.get_int("common", "jobs", rc.jobs);
    if (rc.jobs < 1) throw std::invalid_argument("common.jobs must be >= 1");

    rc.gen_scenes = file.get_int("gen", "scenes", rc.gen_scenes);
    rc.synth = SynthConfig::defaults();
    rc.synth.seed = rc.seed;
    rc.synth.min_distance = file.get_double("gen", "min_distance", rc.synth.min_distance);
    rc.synth.max_distance = file.get_double("gen", "max_distance", rc.synth.max_distance);
    rc.synth.density_decay = file.get_double("gen", "density_decay", rc.synth.density_decay);
    rc.synth.reference_distance =
        file.get_double("gen", "reference_distance", rc.synth.reference_distance);
    rc.synth.strip_anisotropy =
        file.get_double("gen", "strip_anisotropy", rc.synth.strip_anisotropy);
    rc.synth.offset_noise_scale =
        file.get_double("gen", "offset_noise_scale", rc.synth.offset_noise_scale);
    rc.synth.ground_points = file.get_int("gen", "ground_points", rc.synth.ground_points);
    rc.synth.sensor_height = file.get_double("gen", "sensor_height", rc.synth.sensor_height);
    rc.synth.min_points_per_instance =
        file.get_int("gen", "min_points_per_instance", rc.synth.min_points_per_instance);
    rc.synth.classes[0].count = file.get_int("gen", "vehicle_count", rc.synth.classes[0].count);
    rc.synth.classes[1].count = file.get_int("gen", "cyclist_count", rc.synth.classes[1].count);
    rc.synth.classes[2].count = file.get_int("gen", "pedestrian_groups", rc.synth.classes[2].count);
    rc.synth.classes[2].group_spacing_min =
        file.get_double("gen", "pedestrian_spacing_min", rc.synth.classes[2].group_spacing_min);
    rc.synth.classes[2].group_spacing_max =
        file.get_double("gen", "pedestrian_spacing_max", rc.synth.classes[2].group_spacing_max);
    rc.synth.validate();

    rc.cluster_algo = file.get("cluster", "algo", rc.cluster_algo);
    algo_from_name(rc.cluster_algo); // validate early
    rc.meanshift.bandwidth = file.get_double("cluster", "bandwidth", rc.meanshift.bandwidth);
    rc.meanshift.max_iters = file.get_int("cluster", "max_iters", rc.meanshift.max_iters);
    rc.meanshift.convergence_tol =
        file.get_double("cluster", "convergence_tol", rc.meanshift.convergence_tol);
    rc.meanshift.merge_radius = file.get_double("cluster", "merge_radius", rc.meanshift.merge_radius);
    rc.meanshift.seed_count = file.get_int("cluster", "seed_count", rc.meanshift.seed_count);
    rc.meanshift.seed = rc.seed;
    rc.bfs_radius = file.get_double("cluster", "bfs_radius", rc.bfs_radius);
    rc.dbscan_eps = file.get_double("cluster", "dbscan_eps", rc.dbscan_eps);
    rc.dbscan_min_pts = file.get_int("cluster", "dbscan_min_pts", rc.dbscan_min_pts);
    rc.min_instance_size = file.get_int("cluster", "min_instance_size", rc.min_instance_size);
    rc.model_path = file.get("cluster", "model", rc.model_path);

    rc.bank.candidates = file.get_list("dynshift", "candidates", rc.bank.candidates);
    rc.bank.validate();
    rc.iterations = file.get_int("dynshift", "iterations", rc.iterations);
    rc.step_scale = file.get_double("dynshift", "step_scale", rc.step_scale);
    rc.seed_count = file.get_int("dynshift", "seed_count", rc.seed_count);
    rc.hidden_sizes = file.get_int_list("dynshift", "hidden", rc.hidden_sizes);
    rc.final_algo = file.get("dynshift", "final_algo", rc.final_algo);
    if (rc.final_algo == "meanshift") {
        rc.final_cluster.algo = FinalClusterConfig::Algo::MeanShift;
    } else if (rc.final_algo == "bfs") {
        rc.final_cluster.algo = FinalClusterConfig::Algo::Bfs;
    } else {
        throw std::invalid_argument("dynshift.final_algo must be meanshift or bfs");
    }
    rc.final_cluster.meanshift_bandwidth =
        file.get_double("dynshift", "final_bandwidth", rc.final_cluster.meanshift_bandwidth);
    rc.final_cluster.bfs_radius =
        file.get_double("dynshift", "final_radius", rc.final_cluster.bfs_radius);
    rc.schedule().validate();

    rc.epochs = file.get_int("train", "epochs", rc.epochs);
    if (rc.epochs < 0) throw std::invalid_argument("train.epochs must be >= 0");
    rc.adam.lr = file.get_double("train", "lr", rc.adam.lr);
    rc.adam.beta1 = file.get_double("train", "beta1", rc.adam.beta1);
    rc.adam.beta2 = file.get_double("train", "beta2", rc.adam.beta2);
    rc.adam.epsilon = file.get_double("train", "epsilon", rc.adam.epsilon);

    rc.analyze_train_scenes = file.get_int("analyze", "train_scenes", rc.analyze_train_scenes);
    rc.analyze_epochs = file.get_int("analyze", "epochs", rc.analyze_epochs);
    rc.iteration_sweep = file.get_int_list("analyze", "iteration_sweep", rc.iteration_sweep);
    rc.candidate_sets[0] = file.get_list("analyze", "candidates_a", rc.candidate_sets[0]);
    rc.candidate_sets[1] = file.get_list("analyze", "candidates_b", rc.candidate_sets[1]);
    rc.candidate_sets[2] = file.get_list("analyze", "candidates_c", rc.candidate_sets[2]);

    return rc;
}

std::string RunConfig::to_ini() const {
    std::ostringstream out;
    auto list = [](const auto& v) {
        std::ostringstream s;
        for (size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
        return s.str();
    };
    out << "[common]\n";
    out << "scheme = " << scheme_name << "\n";
    out << "seed = " << seed << "\n";
    out << "jobs = " << jobs << "\n\n";

    out << "[gen]\n";
    out << "scenes = " << gen_scenes << "\n";
    out << "min_distance = " << synth.min_distance << "\n";
    out << "max_distance = " << synth.max_distance << "\n";
    out << "density_decay = " << synth.density_decay << "\n";
    out << "reference_distance = " << synth.reference_distance << "\n";
    out << "strip_anisotropy = " << synth.strip_anisotropy << "\n";
    out << "offset_noise_scale = " << synth.offset_noise_scale << "\n";
    out << "ground_points = " << synth.ground_points << "\n";
    out << "sensor_height = " << synth.sensor_height << "\n";
    out << "min_points_per_instance = " << synth.min_points_per_instance << "\n";
    out << "vehicle_count = " << synth.classes[0].count << "\n";
    out << "cyclist_count = " << synth.classes[1].count << "\n";
    out << "pedestrian_groups = " << synth.classes[2].count << "\n";
    out << "pedestrian_spacing_min = " << synth.classes[2].group_spacing_min << "\n";
    out << "pedestrian_spacing_max = " << synth.classes[2].group_spacing_max << "\n\n";

    out << "[cluster]\n";
    out << "algo = " << cluster_algo << "\n";
    out << "bandwidth = " << meanshift.bandwidth << "\n";
    out << "max_iters = " << meanshift.max_iters << "\n";
    out << "convergence_tol = " << meanshift.convergence_tol << "\n";
    out << "merge_radius = " << meanshift.merge_radius << "\n";
    out << "seed_count = " << meanshift.seed_count << "\n";
    out << "bfs_radius = " << bfs_radius << "\n";
    out << "dbscan_eps = " << dbscan_eps << "\n";
    out << "dbscan_min_pts = " << dbscan_min_pts << "\n";
    out << "min_instance_size = " << min_instance_size << "\n";
    if (!model_path.empty()) out << "model = " << model_path << "\n";
    out << "\n[dynshift]\n";
    out << "candidates = " << list(bank.candidates) << "\n";
    out << "iterations = " << iterations << "\n";
    out << "step_scale = " << step_scale << "\n";
    out << "seed_count = " << seed_count << "\n";
    out << "hidden = " << list(hidden_sizes) << "\n";
    out << "final_algo = " << final_algo << "\n";
    out << "final_bandwidth = " << final_cluster.meanshift_bandwidth << "\n";
    out << "final_radius = " << final_cluster.bfs_radius << "\n\n";

    out << "[train]\n";
    out << "epochs = " << epochs << "\n";
    out << "lr = " << adam.lr << "\n";
    out << "beta1 = " << adam.beta1 << "\n";
    out << "beta2 = " << adam.beta2 << "\n";
    out << "epsilon = " << adam.epsilon << "\n\n";

    out << "[analyze]\n";
    out << "train_scenes = " << analyze_train_scenes << "\n";
    out << "epochs = " << analyze_epochs << "\n";
    out << "iteration_sweep = " << list(iteration_sweep) << "\n";
    out << "candidates_a = " << list(candidate_sets[0]) << "\n";
    out << "candidates_b = " << list(candidate_sets[1]) << "\n";
    out << "candidates_c = " << list(candidate_sets[2]) << "\n";
    return out.str();
}

} // namespace dyshift
