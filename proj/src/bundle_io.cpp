#include "domseq/engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace domseq {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "domseq-bundle";

template <typename F>
void for_each_tensor(ModelBundle& b, F&& f) {
    f("vectorizer.idf", b.vectorizer.idf);
    b.svm.visit([&](const char* name, auto& t) { f(std::string("svm.") + name, t); });
    b.ensemble.visit([&](const char* name, auto& t) { f(std::string("ensemble.") + name, t); });
    b.rnn.visit([&](const char* name, auto& t) { f(std::string("rnn.") + name, t); });
    for (std::size_t i = 0; i < b.generators.size(); ++i)
        b.generators[i].params.visit(
            [&](const char* name, auto& t) { f("generator." + std::to_string(i) + "." + name, t); });
}

std::string to_little_endian(const Scalar* data, Eigen::Index n) {
    std::string bytes(static_cast<std::size_t>(n) * sizeof(Scalar), '\0');
    std::memcpy(bytes.data(), data, bytes.size());
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < bytes.size(); i += sizeof(Scalar))
            std::reverse(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                         bytes.begin() + static_cast<std::ptrdiff_t>(i + sizeof(Scalar)));
    return bytes;
}

void from_little_endian(std::string bytes, Scalar* data) {
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < bytes.size(); i += sizeof(Scalar))
            std::reverse(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                         bytes.begin() + static_cast<std::ptrdiff_t>(i + sizeof(Scalar)));
    std::memcpy(data, bytes.data(), bytes.size());
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("bundle: missing file '" + path.filename().string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("bundle: cannot write '" + path.string() + "'");
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir) {
    validate(bundle);
    namespace fs = std::filesystem;
    fs::path tmp = dir;
    tmp += ".partial";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    json manifest;
    manifest["format"] = kFormatName;
    manifest["version"] = bundle.format_version;
    manifest["config"] = json::parse(config_to_json(bundle.config));
    manifest["vectorizer"] = {{"n_docs", bundle.vectorizer.n_docs}, {"vocab", bundle.vectorizer.vocab.tokens()}};
    manifest["rnn"] = {{"hidden", bundle.rnn.hidden()}};
    json gens = json::array();
    for (const auto& g : bundle.generators)
        gens.push_back({{"domain", bundle.config.domains.name(g.domain)},
                        {"vocab", g.vocab.tokens()},
                        {"embed", g.params.embed_dim()},
                        {"hidden", g.params.hidden()},
                        {"layers", g.params.layers()}});
    manifest["generators"] = std::move(gens);

    json tensors = json::object();
    for_each_tensor(const_cast<ModelBundle&>(bundle), [&](const std::string& name, auto& t) {
        const std::string file = name + ".f64";
        tensors[name] = {{"file", file}, {"rows", t.rows()}, {"cols", t.cols()}};
        write_all(tmp / file, to_little_endian(t.data(), t.size()));
    });
    manifest["tensors"] = std::move(tensors);
    write_all(tmp / "manifest.json", manifest.dump(2) + "\n");

    fs::remove_all(dir);
    fs::rename(tmp, dir);
}

ModelBundle load_bundle(const std::filesystem::path& dir) {
    json manifest;
    try {
        manifest = json::parse(read_all(dir / "manifest.json"));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("bundle: corrupt manifest: " + std::string(e.what()));
    }

    try {
        if (manifest.value("format", "") != kFormatName) throw Error("bundle: not a domseq bundle");
        const int version = manifest.at("version").get<int>();
        if (version != ModelBundle::kFormatVersion)
            throw Error("bundle: format version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(ModelBundle::kFormatVersion) + ")");

        ModelBundle b;
        b.format_version = version;
        b.config = parse_config(manifest.at("config").dump());
        const int k = b.config.domains.size();

        b.vectorizer.n_docs = manifest.at("vectorizer").at("n_docs").get<int>();
        b.vectorizer.vocab =
            Vocabulary::from_tokens(manifest.at("vectorizer").at("vocab").get<std::vector<std::string>>());
        const int v = b.vectorizer.vocab.size();
        b.vectorizer.idf = Vector::Zero(v);
        b.svm = {Matrix::Zero(k, v), Vector::Zero(k)};
        b.ensemble = LogisticModel::zeros(k);
        b.rnn = RnnDomainModel::zeros(k, manifest.at("rnn").at("hidden").get<int>());
        for (const auto& g : manifest.at("generators")) {
            Seq2SeqModel m;
            m.domain = b.config.domains.at(g.at("domain").get<std::string>());
            m.vocab = Vocabulary::from_tokens(g.at("vocab").get<std::vector<std::string>>());
            m.params = Seq2SeqParams::zeros(m.vocab.size(), g.at("embed").get<int>(), g.at("hidden").get<int>(),
                                            g.at("layers").get<int>());
            b.generators.push_back(std::move(m));
        }

        const json& tensors = manifest.at("tensors");
        for_each_tensor(b, [&](const std::string& name, auto& t) {
            if (!tensors.contains(name)) throw Error("bundle: manifest lacks tensor '" + name + "'");
            const json& entry = tensors.at(name);
            if (entry.at("rows").get<Eigen::Index>() != t.rows() || entry.at("cols").get<Eigen::Index>() != t.cols())
                throw Error("bundle: tensor '" + name + "' has unexpected shape");
            std::string bytes = read_all(dir / entry.at("file").get<std::string>());
            if (bytes.size() != static_cast<std::size_t>(t.size()) * sizeof(Scalar))
                throw Error("bundle: tensor file for '" + name + "' is truncated or oversized");
            from_little_endian(std::move(bytes), t.data());
        });
        validate(b);
        return b;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("bundle: corrupt manifest: " + std::string(e.what()));
    }
}

}  // namespace domseq
