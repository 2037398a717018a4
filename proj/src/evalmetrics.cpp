#include "domseq/evalmetrics.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace domseq {

void EmbeddingTable::set(const std::string& token, Vector v) {
    if (v.size() != dim_) throw Error("embedding for '" + token + "' has wrong dimension");
    auto [it, inserted] = vectors_.insert_or_assign(token, std::move(v));
    if (inserted) order_.push_back(token);
}

const Vector* EmbeddingTable::find(const std::string& token) const {
    auto it = vectors_.find(token);
    return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embeddings '" + path.string() + "'");
    std::optional<EmbeddingTable> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue;
        std::vector<double> values;
        for (double x; ls >> x;) values.push_back(x);
        if (!ls.eof()) throw Error(path.string() + ":" + std::to_string(lineno) + ": bad number");
        if (!table) table.emplace(static_cast<int>(values.size()));
        if (static_cast<int>(values.size()) != table->dim())
            throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(table->dim()) + " values");
        table->set(token, Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    return table ? std::move(*table) : EmbeddingTable{};
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& tok : table.tokens()) {
        os << tok;
        const Vector& v = *table.find(tok);
        for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v(i);
        os << '\n';
    }
    write_file_atomic(path, os.str());
}

namespace {

std::vector<const Vector*> covered(std::span<const std::string> tokens, const EmbeddingTable& table) {
    std::vector<const Vector*> out;
    for (const auto& t : tokens)
        if (const Vector* v = table.find(t)) out.push_back(v);
    return out;
}

double directional(const std::vector<const Vector*>& from, const std::vector<const Vector*>& to) {
    double sum = 0;
    for (const Vector* a : from) {
        double best = -1;
        for (const Vector* b : to) best = std::max(best, cosine(*a, *b));
        sum += best;
    }
    return sum / static_cast<double>(from.size());
}

}  // namespace

std::optional<double> greedy_match_directional(std::span<const std::string> from,
                                               std::span<const std::string> to,
                                               const EmbeddingTable& table) {
    const auto a = covered(from, table);
    const auto b = covered(to, table);
    if (a.empty() || b.empty()) return std::nullopt;
    return directional(a, b);
}

double greedy_match(std::span<const std::string> candidate, std::span<const std::string> reference,
                    const EmbeddingTable& table) {
    const auto c = covered(candidate, table);
    const auto r = covered(reference, table);
    if (c.empty() || r.empty()) return 0;
    return 0.5 * (directional(c, r) + directional(r, c));
}

EvalReport evaluate(std::span<const EvalExample> examples, const EmbeddingTable& table) {
    EvalReport report;
    report.n_examples = examples.size();
    if (examples.empty()) return report;

    std::size_t labelled = 0;
    std::size_t correct = 0;
    double greedy_sum = 0;
    for (const auto& ex : examples) {
        if (ex.predicted && ex.gold) {
            ++labelled;
            if (*ex.predicted == *ex.gold) ++correct;
        }
        if (!greedy_match_directional(ex.generated, ex.reference, table)) ++report.uncovered_sentences;
        greedy_sum += greedy_match(ex.generated, ex.reference, table);
    }
    if (labelled > 0) report.domain_accuracy = static_cast<double>(correct) / static_cast<double>(labelled);
    report.greedy_match = greedy_sum / static_cast<double>(examples.size());
    return report;
}

}  // namespace domseq
