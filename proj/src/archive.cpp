#include "autolinc/archive.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace autolinc {

std::optional<double> Archive::lookup(const std::string& canon, const Fingerprint& fp) const {
    std::lock_guard lk(mu_);
    if (auto it = by_canonical_.find(canon); it != by_canonical_.end())
        return records_[it->second].reward;
    if (auto it = by_fingerprint_.find(fp.hash); it != by_fingerprint_.end())
        return records_[it->second].reward;
    return std::nullopt;
}

bool Archive::contains(const std::string& canon) const {
    std::lock_guard lk(mu_);
    return by_canonical_.count(canon) > 0;
}

void Archive::insert(ArchiveRecord rec, const std::optional<Fingerprint>& fp) {
    std::lock_guard lk(mu_);
    if (by_canonical_.count(rec.canonical)) return;
    size_t idx = records_.size();
    by_canonical_[rec.canonical] = idx;
    if (fp && !by_fingerprint_.count(fp->hash)) by_fingerprint_[fp->hash] = idx;
    records_.push_back(std::move(rec));
}

std::vector<ArchiveRecord> Archive::records() const {
    std::lock_guard lk(mu_);
    return records_;
}

size_t Archive::size() const {
    std::lock_guard lk(mu_);
    return records_.size();
}

size_t Archive::finished_count() const {
    std::lock_guard lk(mu_);
    size_t n = 0;
    for (const auto& r : records_)
        if (r.status == "finished") ++n;
    return n;
}

double Archive::max_reward() const {
    std::lock_guard lk(mu_);
    double best = 0;
    for (const auto& r : records_) best = std::max(best, r.reward);
    return best;
}

std::vector<ArchiveRecord> Archive::top(size_t k) const {
    std::lock_guard lk(mu_);
    std::vector<ArchiveRecord> fin;
    for (const auto& r : records_)
        if (r.status == "finished") fin.push_back(r);
    std::stable_sort(fin.begin(), fin.end(), [](const auto& a, const auto& b) {
        if (a.reward != b.reward) return a.reward > b.reward;
        return a.episode < b.episode;
    });
    if (fin.size() > k) fin.resize(k);
    return fin;
}

std::optional<double> Archive::kth_best(size_t k) const {
    auto t = top(k);
    if (t.size() < k) return std::nullopt;
    return t.back().reward;
}

void Archive::save_jsonl(const std::string& path) const {
    std::lock_guard lk(mu_);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Archive::save_jsonl: cannot open " + path);
    for (const auto& r : records_) {
        nlohmann::json j{{"expr", r.expr},       {"canonical", r.canonical},
                         {"reward", r.reward},   {"status", r.status},
                         {"episode", r.episode}, {"trial", r.trial},
                         {"wall_ms", r.wall_ms}};
        out << j.dump() << "\n";
    }
}

Archive Archive::load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Archive::load_jsonl: cannot open " + path);
    Archive a;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        ArchiveRecord r;
        r.expr = j.at("expr");
        r.canonical = j.at("canonical");
        r.reward = j.at("reward");
        r.status = j.at("status");
        r.episode = j.at("episode");
        r.trial = j.at("trial");
        r.wall_ms = j.at("wall_ms");
        a.insert(std::move(r), std::nullopt);
    }
    return a;
}

}  // namespace autolinc
