#pragma once

// Content-addressed completion cache: one file per entry, named by the hex
// SHA-256 of (backend tag, model, decoding params, prompt). Entries are
// written to a temporary file and renamed into place, so concurrent writers
// of the same key leave exactly one complete file.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <semaphore>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lave/digest.hpp"
#include "lave/log.hpp"
#include "lave/llm/backend.hpp"

namespace lave::llm {

struct CacheEntry {
  std::string key;
  std::string completion;
  std::string created_at;  // ISO-8601 UTC
};

inline std::string cache_key(const std::string& backend_tag, const CompletionRequest& r) {
  const nlohmann::json k{{"backend", backend_tag}, {"model", r.model}, {"params", r.params()}, {"prompt", r.prompt}};
  return sha256_hex(k.dump());
}

namespace detail {

inline std::string utc_now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string random_suffix() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream s;
  s << std::hex << rng();
  return s.str();
}

}  // namespace detail

class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

  std::optional<CacheEntry> get(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.at("key").get<std::string>() != key) return std::nullopt;
      return CacheEntry{key, j.at("completion").get<std::string>(), j.value("created_at", "")};
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  /// Throws std::filesystem::filesystem_error or std::runtime_error on I/O failure.
  void put(const CacheEntry& e) const {
    std::filesystem::create_directories(dir_);
    const auto final_path = path_for(e.key);
    const auto tmp = dir_ / ("." + e.key + "." + detail::random_suffix() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot create " + tmp.string());
      out << nlohmann::json{{"key", e.key}, {"completion", e.completion}, {"created_at", e.created_at}}.dump()
          << '\n';
      out.flush();
      if (!out) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw std::runtime_error("cannot write " + tmp.string());
      }
    }
    std::filesystem::rename(tmp, final_path);
  }

  struct Stats {
    std::size_t entries = 0;
    std::uintmax_t bytes = 0;
  };

  Stats stats() const {
    Stats s;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir_, ec)) return s;
    for (const auto& f : std::filesystem::directory_iterator(dir_))
      if (is_entry(f.path())) {
        ++s.entries;
        s.bytes += f.file_size();
      }
    return s;
  }

  /// Removes every entry and stray temporary file; returns the entry count removed.
  std::size_t clear() const {
    std::size_t removed = 0;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir_, ec)) return 0;
    std::vector<std::filesystem::path> doomed;
    for (const auto& f : std::filesystem::directory_iterator(dir_)) {
      const auto name = f.path().filename().string();
      if (is_entry(f.path())) {
        doomed.push_back(f.path());
        ++removed;
      } else if (name.starts_with('.') && name.ends_with(".tmp")) {
        doomed.push_back(f.path());
      }
    }
    for (const auto& p : doomed) std::filesystem::remove(p);
    return removed;
  }

 private:
  std::filesystem::path dir_;

  static bool is_entry(const std::filesystem::path& p) {
    const auto stem = p.stem().string();
    return p.extension() == ".json" && stem.size() == 64 &&
           stem.find_first_not_of("0123456789abcdef") == std::string::npos;
  }
};

/// Wraps any backend with the on-disk cache. Cache I/O problems degrade to
/// pass-through with a warning; they never fail a request.
class CachedBackend final : public Backend {
 public:
  CachedBackend(Backend& inner, std::filesystem::path dir) : inner_(inner), cache_(std::move(dir)) {}

  std::string complete(const CompletionRequest& request) override {
    const auto key = cache_key(inner_.tag(), request);
    if (auto hit = cache_.get(key)) {
      ++hits_;
      return hit->completion;
    }
    ++misses_;
    auto completion = inner_.complete(request);
    try {
      cache_.put({key, completion, detail::utc_now_iso8601()});
    } catch (const std::exception& e) {
      if (!warned_.exchange(true)) log_warning(std::string("completion cache disabled for writes: ") + e.what());
    }
    return completion;
  }

  std::string tag() const override { return inner_.tag(); }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  const CompletionCache& cache() const { return cache_; }

 private:
  Backend& inner_;
  CompletionCache cache_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<bool> warned_{false};
};

/// Caps the number of requests in flight against the wrapped backend.
class ThrottledBackend final : public Backend {
 public:
  ThrottledBackend(Backend& inner, int limit) : inner_(inner), slots_(std::max(1, limit)) {}

  std::string complete(const CompletionRequest& request) override {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    return inner_.complete(request);
  }

  std::string tag() const override { return inner_.tag(); }

 private:
  Backend& inner_;
  std::counting_semaphore<> slots_;
};

}  // namespace lave::llm
