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

#include "forge/review_service.hpp"

#include "forge/csv.hpp"
#include "forge/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <fcntl.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <sstream>

namespace forge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reuse_addr_only(socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
}

std::optional<int> query_int(const httplib::Request& req, const char* key, int fallback) {
    if (!req.has_param(key)) return fallback;
    const std::string v = req.get_param_value(key);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || out < 0) return std::nullopt;
    return out;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

}  // namespace

ReviewService::ReviewService(fs::path manifest_path, fs::path patch_dir, std::optional<fs::path> ui_dir)
    : manifest_path_(std::move(manifest_path)), patch_dir_(std::move(patch_dir)), ui_dir_(std::move(ui_dir)) {
    if (!fs::is_directory(patch_dir_)) throw MissingPatchDir("patch directory not found: " + patch_dir_.string());
    manifest_ = read_manifest(manifest_path_);

    if (fs::exists(wal_path())) {
        std::string text = csv::read_text(wal_path());
        // Drop a torn final line so the next append starts on a fresh line.
        if (!text.empty() && text.back() != '\n') {
            const auto keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
            text.resize(keep);
            std::error_code ec;
            fs::resize_file(wal_path(), keep, ec);
            if (ec) throw IoError("cannot repair " + wal_path().string() + ": " + ec.message());
        }
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            const auto v = parse_verdict(std::string_view(line).substr(comma + 1));
            ManifestRow* row = manifest_.find(std::string_view(line).substr(0, comma));
            if (!row || !v || !is_manual(*v)) continue;
            if (row->verdict == Verdict::NeedsReview) row->verdict = *v;
        }
    }

    for (const auto& row : manifest_.rows) {
        if (row.verdict != Verdict::NeedsReview) continue;
        const fs::path path = patch_path(patch_dir_, row.patch_id);
        if (!fs::exists(path)) throw MissingPatchFile("missing patch image " + path.string());
        items_[row.patch_id].stats = region_stats(to_luminance(read_image(path)));
    }

    wal_fd_ = ::open(wal_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (wal_fd_ < 0) throw IoError("cannot open " + wal_path().string());
}

ReviewService::~ReviewService() {
    halt();
    if (wal_fd_ >= 0) ::close(wal_fd_);
}

fs::path ReviewService::wal_path() const { return fs::path(manifest_path_.string() + ".wal"); }

void ReviewService::append_wal(const std::string& patch_id, Verdict v) {
    const std::string line = patch_id + "," + std::string(to_string(v)) + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
        const auto n = ::write(wal_fd_, line.data() + done, line.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("cannot append to " + wal_path().string());
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(wal_fd_) != 0) throw IoError("cannot sync " + wal_path().string());
}

ReviewProgress ReviewService::progress() const {
    std::lock_guard lock(mu_);
    ReviewProgress p;
    for (const auto& row : manifest_.rows) {
        if (row.verdict == Verdict::NeedsReview) ++p.pending;
        else if (is_manual(row.verdict)) ++p.decided;
    }
    p.total = p.pending + p.decided;
    return p;
}

std::vector<std::string> ReviewService::pending_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& row : manifest_.rows) {
        if (row.verdict == Verdict::NeedsReview) ids.push_back(row.patch_id);
    }
    return ids;
}

VerdictOutcome ReviewService::decide(const std::string& patch_id, bool keep) {
    std::lock_guard lock(mu_);
    ManifestRow* row = manifest_.find(patch_id);
    if (!row) return VerdictOutcome::UnknownId;
    const Verdict target = keep ? Verdict::ManualKeep : Verdict::ManualReject;
    if (row->verdict == target) return VerdictOutcome::AlreadyApplied;
    if (row->verdict != Verdict::NeedsReview) return VerdictOutcome::NotPending;
    append_wal(patch_id, target);
    row->verdict = target;
    return VerdictOutcome::Applied;
}

Manifest ReviewService::snapshot() const {
    std::lock_guard lock(mu_);
    return manifest_;
}

void ReviewService::install_routes() {
    auto& s = *server_;

    s.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
        const auto offset = query_int(req, "offset", 0);
        const auto limit = query_int(req, "limit", 50);
        if (!offset || !limit) return send_error(res, 400, "offset and limit must be non-negative integers");
        json out = json::array();
        std::lock_guard lock(mu_);
        int index = 0;
        for (const auto& row : manifest_.rows) {
            if (row.verdict != Verdict::NeedsReview) continue;
            if (index++ < *offset) continue;
            if (static_cast<int>(out.size()) >= *limit) break;
            const auto& st = items_.at(row.patch_id).stats;
            out.push_back({{"patch_id", row.patch_id},
                           {"class", std::string(to_string(row.label))},
                           {"stats", {{"mean", st.mean}, {"p05", st.p05}, {"p95", st.p95}, {"michelson", st.michelson}}},
                           {"image_url", "/api/patch/" + row.patch_id + ".png"}});
        }
        send_json(res, 200, out);
    });

    s.Get(R"(/api/patch/([^/]+)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        {
            std::lock_guard lock(mu_);
            if (!manifest_.find(id)) return send_error(res, 404, "unknown patch_id '" + id + "'");
        }
        try {
            const auto bytes = read_file_bytes(patch_path(patch_dir_, id));
            res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
        } catch (const Error& e) {
            send_error(res, 404, e.what());
        }
    });

    s.Post("/api/verdict", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            return send_error(res, 400, "body is not valid JSON");
        }
        if (!body.is_object() || !body.contains("patch_id") || !body.contains("verdict") ||
            !body["patch_id"].is_string() || !body["verdict"].is_string()) {
            return send_error(res, 400, "body must be {\"patch_id\": string, \"verdict\": \"keep\"|\"reject\"}");
        }
        const std::string id = body["patch_id"];
        const std::string verdict = body["verdict"];
        if (verdict != "keep" && verdict != "reject") return send_error(res, 400, "verdict must be keep or reject");
        VerdictOutcome outcome;
        try {
            outcome = decide(id, verdict == "keep");
        } catch (const Error& e) {
            return send_error(res, 500, e.what());
        }
        switch (outcome) {
            case VerdictOutcome::UnknownId:
                return send_error(res, 404, "unknown patch_id '" + id + "'");
            case VerdictOutcome::NotPending:
                return send_error(res, 409, "patch '" + id + "' is not awaiting review");
            case VerdictOutcome::Applied:
            case VerdictOutcome::AlreadyApplied:
                return send_json(res, 200,
                                 {{"patch_id", id},
                                  {"verdict", std::string(to_string(verdict == "keep" ? Verdict::ManualKeep
                                                                                       : Verdict::ManualReject))}});
        }
    });

    s.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
        const auto p = progress();
        send_json(res, 200, {{"pending", p.pending}, {"decided", p.decided}, {"total", p.total}});
    });

    s.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(format_manifest(snapshot()), "text/csv");
    });

    if (ui_dir_) s.set_mount_point("/", ui_dir_->string());
}

int ReviewService::start(const std::string& host, int port) {
    if (server_) throw PortUnavailable("review service already running");
    server_ = std::make_unique<httplib::Server>();
    server_->set_socket_options(reuse_addr_only);
    install_routes();
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        if (port_ < 0) {
            server_.reset();
            throw PortUnavailable("cannot bind any port on " + host);
        }
    } else if (server_->bind_to_port(host, port)) {
        port_ = port;
    } else {
        server_.reset();
        throw PortUnavailable("cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void ReviewService::halt() {
    if (!server_) return;
    server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
}

void ReviewService::stop() {
    halt();
    std::lock_guard lock(mu_);
    write_manifest(manifest_path_, manifest_);
    std::error_code ec;
    fs::remove(wal_path(), ec);
    if (wal_fd_ >= 0) {
        ::close(wal_fd_);
        wal_fd_ = -1;
    }
}

void ReviewService::abandon() { halt(); }

}  // namespace forge
