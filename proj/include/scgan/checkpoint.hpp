#ifndef SCGAN_CHECKPOINT_HPP
#define SCGAN_CHECKPOINT_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/nn.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Checkpoint directory format.
//
//   dir/manifest.txt    one line per model parameter: "name, float32, 2x3x4"
//   dir/<name>.bin      raw little-endian float32, row-major
//   dir/opt/            optimizer moments in the same manifest+bin format,
//                       names prefixed m./v.
//   dir/pool_a.bin, pool_b.bin   flat image history buffers
//   dir/state.json      counters, mode tag, config echo, pool/image sizes
//
// Loading validates every name and shape against the constructed
// architecture; a manifest that is missing a parameter, has an extra one,
// or disagrees on a shape is rejected. Writes land in a temporary sibling
// directory that is renamed into place, so a crash cannot leave a partial
// checkpoint under the final name.
// ---------------------------------------------------------------------------

namespace ckpt_detail {

inline std::string shape_str(const Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.rank(); ++i) {
        if (i) out += 'x';
        out += std::to_string(s[i]);
    }
    return out.empty() ? "1" : out;
}

template <typename T>
void write_blob(const std::string& path, const T* data, std::size_t count) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    SCGAN_CHECK(f.good(), IoError, "cannot open ", path, " for writing");
    f.write(reinterpret_cast<const char*>(data),
            std::streamsize(count * sizeof(T)));
    SCGAN_CHECK(f.good(), IoError, "short write to ", path);
}

template <typename T>
void read_blob(const std::string& path, T* data, std::size_t count) {
    std::ifstream f(path, std::ios::binary);
    SCGAN_CHECK(f.good(), IoError, "cannot open ", path);
    f.read(reinterpret_cast<char*>(data), std::streamsize(count * sizeof(T)));
    SCGAN_CHECK(f.gcount() == std::streamsize(count * sizeof(T)), IoError,
                "short read from ", path);
    char extra;
    SCGAN_CHECK(!f.read(&extra, 1), IoError, path,
                " is larger than the declared shape");
}

} // namespace ckpt_detail

// Write named tensors as manifest.txt + one .bin per name under dir.
template <typename T>
void save_tensors(const std::string& dir,
                  const std::vector<std::pair<std::string, const Tensor<T>*>>&
                      tensors) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir + "/manifest.txt", std::ios::trunc);
    SCGAN_CHECK(manifest.good(), IoError, "cannot write manifest in ", dir);
    for (const auto& [name, t] : tensors) {
        manifest << name << ", float32, " << ckpt_detail::shape_str(t->shape())
                 << "\n";
        ckpt_detail::write_blob(dir + "/" + name + ".bin", t->data(),
                                t->numel());
    }
    SCGAN_CHECK(manifest.good(), IoError, "short manifest write in ", dir);
}

// Strict load: the manifest must list exactly the expected names with
// matching shapes.
template <typename T>
void load_tensors(const std::string& dir,
                  const std::vector<std::pair<std::string, Tensor<T>*>>&
                      tensors) {
    std::ifstream manifest(dir + "/manifest.txt");
    SCGAN_CHECK(manifest.good(), IoError, "missing manifest.txt in ", dir);
    std::vector<std::pair<std::string, std::string>> listed; // name -> shape
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        const std::size_t c1 = line.find(", ");
        const std::size_t c2 =
            c1 == std::string::npos ? std::string::npos : line.find(", ", c1 + 2);
        SCGAN_CHECK(c2 != std::string::npos, IoError,
                    "malformed manifest line in ", dir, ": ", line);
        const std::string dtype = line.substr(c1 + 2, c2 - c1 - 2);
        SCGAN_CHECK(dtype == "float32", IoError, "unsupported dtype ", dtype,
                    " in ", dir);
        listed.emplace_back(line.substr(0, c1), line.substr(c2 + 2));
    }
    SCGAN_CHECK(listed.size() == tensors.size(), IoError, "checkpoint in ",
                dir, " lists ", listed.size(), " tensors, architecture has ",
                tensors.size());
    for (const auto& [name, t] : tensors) {
        const std::string want = ckpt_detail::shape_str(t->shape());
        bool found = false;
        for (const auto& [lname, lshape] : listed)
            if (lname == name) {
                SCGAN_CHECK(lshape == want, IoError, "checkpoint tensor ",
                            name, " has shape ", lshape, ", architecture wants ",
                            want);
                found = true;
                break;
            }
        SCGAN_CHECK(found, IoError, "checkpoint in ", dir, " is missing ",
                    name);
        ckpt_detail::read_blob(dir + "/" + name + ".bin", t->data(),
                               t->numel());
    }
}

// Model parameters only (the part `translate` needs).
template <typename T>
void save_model_params(const std::string& dir, const TranslationModel<T>& m) {
    std::vector<std::pair<std::string, const Tensor<T>*>> tensors;
    for (const auto& [name, p] : m.params.items())
        tensors.emplace_back(name, &p->value);
    save_tensors(dir, tensors);
}

template <typename T>
void load_model_params(const std::string& dir, TranslationModel<T>& m) {
    std::vector<std::pair<std::string, Tensor<T>*>> tensors;
    for (const auto& [name, p] : m.params.items())
        tensors.emplace_back(name, &p->value);
    load_tensors(dir, tensors);
}

// Replace dir atomically with the contents staged under dir + ".tmp".
inline void commit_dir(const std::string& tmp, const std::string& dir) {
    namespace fs = std::filesystem;
    if (fs::exists(dir)) fs::remove_all(dir);
    fs::rename(tmp, dir);
}

} // namespace scgan

#endif
