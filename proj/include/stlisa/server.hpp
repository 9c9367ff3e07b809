#pragma once

// HTTP front end for the dashboard: static assets plus the results and
// geometry files, served byte-for-byte as they were on disk at startup.

#include <sys/socket.h>

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <httplib.h>

#include "stlisa/data_model.hpp"
#include "stlisa/error.hpp"
#include "stlisa/results.hpp"

namespace stlisa {

/// Ids present on only one side of a results/geometry pair.
struct IdMismatch {
  std::vector<std::string> missing_from_geometry;
  std::vector<std::string> missing_from_results;
  bool empty() const { return missing_from_geometry.empty() && missing_from_results.empty(); }
};

inline IdMismatch compare_ids(const ResultSet& rs, const AreaSet& areas) {
  IdMismatch out;
  std::set<std::string> result_ids;
  for (const auto& l : rs.locations) {
    result_ids.insert(l.id);
    if (!areas.index_of(l.id)) out.missing_from_geometry.push_back(l.id);
  }
  for (const auto& a : areas.areas()) {
    if (!result_ids.count(a.id)) out.missing_from_results.push_back(a.id);
  }
  return out;
}

/// Refuses a results/geometry pair whose location ids differ, listing up to five.
inline void validate_pair(const ResultSet& rs, const AreaSet& areas) {
  const auto mm = compare_ids(rs, areas);
  if (mm.empty()) return;
  std::vector<std::string> listed;
  for (const auto& id : mm.missing_from_geometry) listed.push_back(id + " (not in geometry)");
  for (const auto& id : mm.missing_from_results) listed.push_back(id + " (not in results)");
  std::string msg = "location ids differ between results and geometry (" + std::to_string(listed.size()) +
                    " mismatches):";
  for (std::size_t i = 0; i < listed.size() && i < 5; ++i) msg += (i ? ", " : " ") + listed[i];
  throw InputError(msg);
}

/// STLISA_DASHBOARD_DIR, if set and present; otherwise no asset directory.
inline std::optional<std::filesystem::path> dashboard_asset_dir() {
  if (const char* env = std::getenv("STLISA_DASHBOARD_DIR"); env && *env) {
    std::filesystem::path p(env);
    std::error_code ec;
    if (std::filesystem::is_directory(p, ec)) return p;
  }
  return std::nullopt;
}

inline constexpr const char* kFallbackIndex = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>stlisa</title></head>
<body>
<h1>stlisa results server</h1>
<p>No dashboard assets are installed. Set STLISA_DASHBOARD_DIR to a built dashboard directory.</p>
<ul><li><a href="/api/results">/api/results</a></li><li><a href="/api/geometry">/api/geometry</a></li></ul>
</body></html>
)";

class DashboardServer {
 public:
  DashboardServer(std::string results_bytes, std::string geometry_bytes,
                  std::optional<std::filesystem::path> assets = std::nullopt)
      : results_(std::move(results_bytes)), geometry_(std::move(geometry_bytes)), assets_(std::move(assets)) {
    const ResultSet rs = parse_results(results_);
    const AreaSet areas = parse_geometry(geometry_, rs.id_field, rs.name_field);
    validate_pair(rs, areas);

    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    server_.Get("/api/results", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(results_, "application/json");
    });
    server_.Get("/api/geometry", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(geometry_, "application/json");
    });
    std::string index = kFallbackIndex;
    if (assets_) {
      std::error_code ec;
      if (std::filesystem::exists(*assets_ / "index.html", ec)) index = read_file(*assets_ / "index.html");
      server_.set_mount_point("/assets", assets_->string());
    }
    server_.Get("/", [index](const httplib::Request&, httplib::Response& res) {
      res.set_content(index, "text/html; charset=utf-8");
    });
  }

  static DashboardServer from_files(const std::filesystem::path& results, const std::filesystem::path& geometry,
                                    std::optional<std::filesystem::path> assets = dashboard_asset_dir()) {
    return DashboardServer(read_file(results), read_file(geometry), std::move(assets));
  }

  DashboardServer(DashboardServer&&) = delete;

  /// Port 0 binds an ephemeral port; returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      const int bound = server_.bind_to_any_port(host);
      if (bound <= 0) throw InputError("cannot bind " + host);
      return bound;
    }
    if (!server_.bind_to_port(host, port)) {
      throw InputError("cannot listen on " + host + ":" + std::to_string(port) + " (port in use?)");
    }
    return port;
  }

  /// Blocks until stop().
  void listen() { server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  std::string results_;
  std::string geometry_;
  std::optional<std::filesystem::path> assets_;
  httplib::Server server_;
};

}  // namespace stlisa
