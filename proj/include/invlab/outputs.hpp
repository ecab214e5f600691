#pragma once

// File emission and the run manifest. Every run writes its artifacts plus a
// manifest listing each file with its size and FNV-1a 64 content digest; the
// manifest carries no timestamps, so identical runs produce byte-identical
// manifests. Re-running into a populated directory archives the previous
// manifest instead of overwriting it.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "invlab/policy_store.hpp"  // format_double
#include "invlab/simulate.hpp"
#include "invlab/stats.hpp"

namespace invlab {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

class OutputWriter {
  public:
    explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    /// Write one artifact and record it for the manifest.
    void write(const std::string& name, const std::string& contents) {
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
        os << contents;
        if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
        Entry e;
        e.name = name;
        e.bytes = contents.size();
        e.digest = fnv1a64(contents);
        entries_.push_back(std::move(e));
    }

    /// Archive any previous manifest, then write the new one.
    void finish() {
        const auto manifest_path = dir_ / "manifest.json";
        if (std::filesystem::exists(manifest_path)) {
            int k = 1;
            std::filesystem::path archived;
            do {
                archived = dir_ / ("manifest.archive." + std::to_string(k) + ".json");
                ++k;
            } while (std::filesystem::exists(archived));
            std::filesystem::rename(manifest_path, archived);
        }
        nlohmann::json j;
        j["schema_version"] = 1;
        j["files"] = nlohmann::json::array();
        for (const auto& e : entries_) {
            nlohmann::json f;
            f["path"] = e.name;
            f["bytes"] = e.bytes;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%016llx",
                          static_cast<unsigned long long>(e.digest));
            f["fnv1a64"] = buf;
            j["files"].push_back(f);
        }
        std::ofstream os(manifest_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write manifest");
        os << j.dump(2) << "\n";
    }

  private:
    struct Entry {
        std::string name;
        std::size_t bytes = 0;
        std::uint64_t digest = 0;
    };
    std::filesystem::path dir_;
    std::vector<Entry> entries_;
};

// ============================================================================
// CSV renderers
// ============================================================================

inline std::string costs_csv(const std::vector<double>& costs) {
    std::ostringstream os;
    os << "C_n\n";
    for (double c : costs) os << format_double(c) << "\n";
    return os.str();
}

inline std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "period,X,target,order,Y,D,period_cost,cum_cost\n";
    for (int i = 0; i < tr.periods(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        os << (i + 1) << ',' << format_double(tr.x[u]) << ',' << format_double(tr.target[u])
           << ',' << format_double(tr.order[u]) << ',' << int(tr.filled[u]) << ','
           << format_double(tr.demand[u]) << ',' << format_double(tr.period_cost[u]) << ','
           << format_double(tr.cum_cost[u]) << "\n";
    }
    return os.str();
}

inline std::string histogram_csv(const std::vector<double>& standardized, int bins = 40,
                                 double lo = -5.0, double hi = 5.0) {
    std::vector<long> counts(static_cast<std::size_t>(bins), 0);
    const double w = (hi - lo) / bins;
    for (double z : standardized) {
        if (z < lo || z >= hi) continue;
        ++counts[static_cast<std::size_t>((z - lo) / w)];
    }
    std::ostringstream os;
    os << "bin_left,bin_right,count\n";
    for (int b = 0; b < bins; ++b)
        os << format_double(lo + b * w) << ',' << format_double(lo + (b + 1) * w) << ','
           << counts[static_cast<std::size_t>(b)] << "\n";
    return os.str();
}

inline std::string qq_csv(std::vector<double> standardized) {
    std::sort(standardized.begin(), standardized.end());
    std::ostringstream os;
    os << "theoretical,empirical\n";
    const double n = static_cast<double>(standardized.size());
    for (std::size_t i = 0; i < standardized.size(); ++i) {
        const double p = (static_cast<double>(i) + 0.5) / n;
        os << format_double(normal_quantile(p)) << ',' << format_double(standardized[i]) << "\n";
    }
    return os.str();
}

inline std::string variance_vs_n_csv(const std::vector<double>& horizons,
                                     const std::vector<double>& variances) {
    std::ostringstream os;
    os << "n,variance\n";
    for (std::size_t i = 0; i < horizons.size(); ++i)
        os << format_double(horizons[i]) << ',' << format_double(variances[i]) << "\n";
    return os.str();
}

}  // namespace invlab
