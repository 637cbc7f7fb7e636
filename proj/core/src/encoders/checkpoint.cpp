#include "stda/encoders/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace stda {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'D', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw std::runtime_error("truncated checkpoint " + path.string());
    }
    return v;
}

std::string read_string(std::istream& in, const std::filesystem::path& path) {
    const auto len = read_pod<std::uint32_t>(in, path);
    std::string s(len, '\0');
    if (len > 0 && !in.read(s.data(), len)) {
        throw std::runtime_error("truncated checkpoint " + path.string());
    }
    return s;
}

std::ifstream open_checked(const std::filesystem::path& path, KeyValues& metadata) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint " + path.string());
    }
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error(path.string() + " is not a checkpoint");
    }
    if (read_pod<std::uint32_t>(in, path) != kVersion) {
        throw std::runtime_error("unsupported checkpoint version in " + path.string());
    }
    metadata = KeyValues::parse(read_string(in, path), path.string());
    return in;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const nn::ParameterSet& parameters,
                     const KeyValues& metadata) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint " + path.string());
    }
    out.write(kMagic, 8);
    write_pod(out, kVersion);
    const std::string meta = metadata.to_string();
    write_pod(out, static_cast<std::uint32_t>(meta.size()));
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    write_pod(out, static_cast<std::uint32_t>(parameters.size()));
    for (const auto& [name, var] : parameters.entries()) {
        write_pod(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        const auto& shape = var.shape();
        write_pod(out, static_cast<std::uint32_t>(shape.size()));
        for (int d : shape) {
            write_pod(out, static_cast<std::int32_t>(d));
        }
        out.write(reinterpret_cast<const char*>(var.value().data()),
                  static_cast<std::streamsize>(var.value().size() * sizeof(double)));
    }
    if (!out) {
        throw std::runtime_error("failed writing checkpoint " + path.string());
    }
}

KeyValues read_checkpoint_metadata(const std::filesystem::path& path) {
    KeyValues meta;
    open_checked(path, meta);
    return meta;
}

void load_checkpoint(const std::filesystem::path& path, const nn::ParameterSet& parameters,
                     const KeyValues& expected_metadata) {
    KeyValues meta;
    std::ifstream in = open_checked(path, meta);
    for (const auto& [key, value] : expected_metadata.items()) {
        if (!meta.contains(key)) {
            throw std::runtime_error("checkpoint " + path.string() + " lacks config key '" + key + "'");
        }
        if (meta.get_string(key) != value) {
            throw std::runtime_error("checkpoint " + path.string() + " was built with " + key + " = " +
                                     meta.get_string(key) + ", expected " + value);
        }
    }
    const auto count = read_pod<std::uint32_t>(in, path);
    if (count != parameters.size()) {
        throw std::runtime_error("checkpoint " + path.string() + " holds " + std::to_string(count) +
                                 " arrays, model has " + std::to_string(parameters.size()));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = read_string(in, path);
        const auto rank = read_pod<std::uint32_t>(in, path);
        nn::Shape shape(rank);
        for (auto& d : shape) {
            d = read_pod<std::int32_t>(in, path);
        }
        if (!parameters.contains(name)) {
            throw std::runtime_error("checkpoint array '" + name + "' has no matching parameter");
        }
        nn::Var var = parameters.at(name);
        if (var.shape() != shape) {
            throw std::runtime_error("checkpoint array '" + name + "' has shape " + nn::shape_string(shape) +
                                     ", parameter expects " + nn::shape_string(var.shape()));
        }
        if (!in.read(reinterpret_cast<char*>(var.mutable_value().data()),
                     static_cast<std::streamsize>(var.value().size() * sizeof(double)))) {
            throw std::runtime_error("truncated checkpoint " + path.string());
        }
    }
}

}  // namespace stda
