#include "dyshift/model_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dyshift {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'H', 'M', 'O', 'D', 'L', '1'};

template <typename T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated model file: " + path);
    return value;
}

} // namespace

void save_model(const std::string& path, const ModelFile& model) {
    model.bank.validate();
    model.schedule.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);

    out.write(kMagic, sizeof(kMagic));
    const auto& sizes = model.head.mlp.layer_sizes();
    put<uint32_t>(out, static_cast<uint32_t>(sizes.size()));
    for (int s : sizes) put<uint32_t>(out, static_cast<uint32_t>(s));
    Vector params = model.head.mlp.parameters();
    put<uint64_t>(out, static_cast<uint64_t>(params.size()));
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(sizeof(double) * params.size()));

    put<uint32_t>(out, static_cast<uint32_t>(model.bank.candidates.size()));
    for (double c : model.bank.candidates) put<double>(out, c);

    put<uint32_t>(out, static_cast<uint32_t>(model.schedule.iterations));
    put<double>(out, model.schedule.step_scale);
    for (double w : model.schedule.loss_weights) put<double>(out, w);

    if (!out) throw std::runtime_error("write failed: " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not a model file (bad magic): " + path);
    }

    ModelFile model;
    uint32_t n_sizes = get<uint32_t>(in, path);
    if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("bad layer count in " + path);
    std::vector<int> sizes(n_sizes);
    for (auto& s : sizes) s = static_cast<int>(get<uint32_t>(in, path));
    model.head.mlp = Mlp::zeros(sizes);

    uint64_t n_params = get<uint64_t>(in, path);
    if (n_params != static_cast<uint64_t>(model.head.mlp.parameter_count())) {
        throw std::runtime_error("parameter count does not match layer shapes in " + path);
    }
    Vector params(static_cast<Eigen::Index>(n_params));
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(sizeof(double) * n_params));
    if (!in) throw std::runtime_error("truncated model file: " + path);
    model.head.mlp.set_parameters(params);

    uint32_t l = get<uint32_t>(in, path);
    model.bank.candidates.resize(l);
    for (auto& c : model.bank.candidates) c = get<double>(in, path);

    model.schedule.iterations = static_cast<int>(get<uint32_t>(in, path));
    model.schedule.step_scale = get<double>(in, path);
    model.schedule.loss_weights.resize(static_cast<size_t>(model.schedule.iterations));
    for (auto& w : model.schedule.loss_weights) w = get<double>(in, path);

    model.bank.validate();
    model.schedule.validate();
    return model;
}

} // namespace dyshift
