// Copyright 2026 The Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "forge/manifest.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace forge {

struct ReviewProgress {
    int pending = 0;
    int decided = 0;
    int total = 0;
    friend bool operator==(const ReviewProgress&, const ReviewProgress&) = default;
};

enum class VerdictOutcome { Applied, AlreadyApplied, UnknownId, NotPending };

// Curation queue over a manifest. Every NeedsReview row is pending until a
// keep/reject decision turns it into ManualKeep/ManualReject. Decisions are
// appended to `<manifest>.wal` and fsync'd before they are acknowledged;
// the log is replayed on open and folded into the manifest by `stop()`.
//
// HTTP API (JSON bodies):
//   GET  /api/queue?offset=&limit=   pending items in patch_id order
//   GET  /api/patch/<id>.png         patch image
//   POST /api/verdict                {"patch_id": ..., "verdict": "keep"|"reject"}
//                                    400 malformed, 404 unknown id, 409 not pending
//   GET  /api/progress               {"pending", "decided", "total"}
//   GET  /api/export                 manifest CSV
// A static UI bundle, when given, is served at /.
class ReviewService {
public:
    // Throws MissingPatchDir, MissingPatchFile for a pending row without an
    // image, and the manifest reader's errors.
    ReviewService(std::filesystem::path manifest_path, std::filesystem::path patch_dir,
                  std::optional<std::filesystem::path> ui_dir = std::nullopt);
    ~ReviewService();

    ReviewService(const ReviewService&) = delete;
    ReviewService& operator=(const ReviewService&) = delete;

    // Binds and serves on a background thread; port 0 picks a free port.
    // Returns the bound port. Throws PortUnavailable.
    int start(const std::string& host, int port);
    // Stops serving, rewrites the manifest and removes the log.
    void stop();
    // Stops serving without touching the manifest or the log, as a crash would.
    void abandon();

    int port() const noexcept { return port_; }
    std::filesystem::path wal_path() const;

    // The operations behind the endpoints.
    ReviewProgress progress() const;
    std::vector<std::string> pending_ids() const;
    VerdictOutcome decide(const std::string& patch_id, bool keep);
    Manifest snapshot() const;

private:
    struct Item {
        RegionStats stats;
    };

    void install_routes();
    void append_wal(const std::string& patch_id, Verdict v);
    void halt();

    std::filesystem::path manifest_path_;
    std::filesystem::path patch_dir_;
    std::optional<std::filesystem::path> ui_dir_;
    mutable std::mutex mu_;
    Manifest manifest_;
    std::map<std::string, Item> items_;  // every row that was pending when opened
    int wal_fd_ = -1;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace forge
