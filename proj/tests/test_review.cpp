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

#include "forge/csv.hpp"
#include "forge/errors.hpp"
#include "forge/review_service.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <fstream>

using namespace forge;
using forge::test::TempDir;
using json = nlohmann::json;

namespace {

// Three pending patches, one auto-kept, one auto-rejected.
struct Fixture {
    TempDir dir;
    std::filesystem::path manifest = dir / "manifest.csv";
    std::filesystem::path patches = dir / "patches";

    Fixture() {
        std::filesystem::create_directories(patches);
        Manifest m;
        const std::pair<const char*, Verdict> rows[] = {{"p_r0_c0", Verdict::NeedsReview},
                                                        {"p_r0_c1", Verdict::NeedsReview},
                                                        {"p_r0_c2", Verdict::NeedsReview},
                                                        {"p_r1_c0", Verdict::Keep},
                                                        {"p_r1_c1", Verdict::RejectDark}};
        for (const auto& [id, v] : rows) {
            m.rows.push_back({id, "p.jpg", ClassLabel::BASH, v, Split::Unassigned, {}});
            write_png(test::checkerboard(16, 2, 100, 120), patches / (std::string(id) + ".png"));
        }
        write_manifest(manifest, m);
    }
};

httplib::Result post_verdict(httplib::Client& c, const std::string& id, const std::string& verdict) {
    return c.Post("/api/verdict", json{{"patch_id", id}, {"verdict", verdict}}.dump(), "application/json");
}

int wal_lines(const std::filesystem::path& p) {
    const auto text = csv::read_text(p);
    return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("review: queue, verdicts and progress over HTTP") {
    Fixture f;
    ReviewService svc(f.manifest, f.patches);
    const int port = svc.start("127.0.0.1", 0);
    REQUIRE(port > 0);
    httplib::Client c("127.0.0.1", port);

    auto q = c.Get("/api/queue");
    REQUIRE(q);
    CHECK(q->status == 200);
    const auto items = json::parse(q->body);
    REQUIRE(items.size() == 3);
    CHECK(items[0]["patch_id"] == "p_r0_c0");
    CHECK(items[0]["class"] == "BASH");
    CHECK(items[0]["image_url"] == "/api/patch/p_r0_c0.png");
    CHECK(items[0]["stats"]["michelson"].get<double>() == doctest::Approx((20.0 / 255) / (220.0 / 255 + 1e-6)));

    auto page = c.Get("/api/queue?offset=1&limit=1");
    REQUIRE(page);
    CHECK(json::parse(page->body).size() == 1);
    CHECK(json::parse(page->body)[0]["patch_id"] == "p_r0_c1");
    CHECK(c.Get("/api/queue?limit=-2")->status == 400);
    CHECK(c.Get("/api/queue?offset=abc")->status == 400);

    auto keep = post_verdict(c, "p_r0_c0", "keep");
    REQUIRE(keep);
    CHECK(keep->status == 200);
    CHECK(json::parse(keep->body)["verdict"] == "manual_keep");
    auto prog = json::parse(c.Get("/api/progress")->body);
    CHECK(prog == json{{"pending", 2}, {"decided", 1}, {"total", 3}});
    CHECK(svc.snapshot().find("p_r0_c0")->verdict == Verdict::ManualKeep);

    // Idempotent repeat: acknowledged, not logged twice.
    CHECK(wal_lines(svc.wal_path()) == 1);
    CHECK(post_verdict(c, "p_r0_c0", "keep")->status == 200);
    CHECK(wal_lines(svc.wal_path()) == 1);

    CHECK(post_verdict(c, "nope", "keep")->status == 404);
    CHECK(post_verdict(c, "p_r1_c1", "keep")->status == 409);
    CHECK(post_verdict(c, "p_r0_c0", "reject")->status == 409);
    CHECK(post_verdict(c, "p_r0_c1", "maybe")->status == 400);
    CHECK(c.Post("/api/verdict", "{not json", "application/json")->status == 400);
    CHECK(c.Post("/api/verdict", R"({"patch_id": 3})", "application/json")->status == 400);

    auto png = c.Get("/api/patch/p_r0_c1.png");
    REQUIRE(png);
    CHECK(png->status == 200);
    CHECK(png->get_header_value("Content-Type") == "image/png");
    const std::vector<std::uint8_t> bytes(png->body.begin(), png->body.end());
    CHECK(decode_image(bytes) == test::checkerboard(16, 2, 100, 120));
    CHECK(c.Get("/api/patch/unknown.png")->status == 404);

    auto exported = c.Get("/api/export");
    REQUIRE(exported);
    CHECK(parse_manifest(exported->body) == svc.snapshot());

    CHECK(post_verdict(c, "p_r0_c1", "reject")->status == 200);
    CHECK(post_verdict(c, "p_r0_c2", "keep")->status == 200);
    CHECK(json::parse(c.Get("/api/queue")->body) == json::array());
    CHECK(json::parse(c.Get("/api/progress")->body) == json{{"pending", 0}, {"decided", 3}, {"total", 3}});

    svc.stop();
    const auto final_manifest = read_manifest(f.manifest);
    CHECK(final_manifest.find("p_r0_c0")->verdict == Verdict::ManualKeep);
    CHECK(final_manifest.find("p_r0_c1")->verdict == Verdict::ManualReject);
    CHECK(final_manifest.find("p_r0_c2")->verdict == Verdict::ManualKeep);
    CHECK(final_manifest.find("p_r1_c0")->verdict == Verdict::Keep);
    CHECK_FALSE(std::filesystem::exists(f.manifest.string() + ".wal"));
}

TEST_CASE("review: acknowledged verdicts survive a crash") {
    Fixture f;
    {
        ReviewService svc(f.manifest, f.patches);
        httplib::Client c("127.0.0.1", svc.start("127.0.0.1", 0));
        CHECK(post_verdict(c, "p_r0_c1", "reject")->status == 200);
        svc.abandon();
    }
    CHECK(read_manifest(f.manifest).find("p_r0_c1")->verdict == Verdict::NeedsReview);
    // A torn final append is ignored on replay.
    std::ofstream(f.manifest.string() + ".wal", std::ios::app) << "p_r0_c2,manual_ke";
    ReviewService again(f.manifest, f.patches);
    CHECK(again.snapshot().find("p_r0_c1")->verdict == Verdict::ManualReject);
    CHECK(again.progress() == ReviewProgress{2, 1, 3});
    CHECK(again.pending_ids() == std::vector<std::string>{"p_r0_c0", "p_r0_c2"});
    CHECK(again.decide("p_r0_c1", false) == VerdictOutcome::AlreadyApplied);
    CHECK(again.decide("p_r1_c0", true) == VerdictOutcome::NotPending);
    CHECK(again.decide("zz", true) == VerdictOutcome::UnknownId);
    CHECK(again.decide("p_r0_c2", true) == VerdictOutcome::Applied);
    again.abandon();
    ReviewService third(f.manifest, f.patches);
    CHECK(third.snapshot().find("p_r0_c2")->verdict == Verdict::ManualKeep);
    CHECK(third.snapshot().find("p_r0_c1")->verdict == Verdict::ManualReject);
}

TEST_CASE("review: busy port, missing directory, missing image") {
    Fixture f;
    ReviewService a(f.manifest, f.patches);
    const int port = a.start("127.0.0.1", 0);
    ReviewService b(f.manifest, f.patches);
    CHECK_THROWS_AS(b.start("127.0.0.1", port), PortUnavailable);
    a.abandon();

    CHECK_THROWS_AS(ReviewService(f.manifest, f.dir / "nowhere"), MissingPatchDir);
    std::filesystem::remove(f.patches / "p_r0_c2.png");
    CHECK_THROWS_AS(ReviewService(f.manifest, f.patches), MissingPatchFile);
}

TEST_CASE("review: empty queue and static UI") {
    TempDir dir;
    std::filesystem::create_directories(dir / "patches");
    std::filesystem::create_directories(dir / "ui");
    csv::write_text(dir / "ui" / "index.html", "<html>review</html>");
    Manifest m;
    m.rows.push_back({"x_r0_c0", "x.jpg", ClassLabel::TSH, Verdict::Keep, Split::Unassigned, {}});
    write_manifest(dir / "m.csv", m);
    ReviewService svc(dir / "m.csv", dir / "patches", dir / "ui");
    httplib::Client c("127.0.0.1", svc.start("127.0.0.1", 0));
    CHECK(json::parse(c.Get("/api/queue")->body) == json::array());
    CHECK(json::parse(c.Get("/api/progress")->body) == json{{"pending", 0}, {"decided", 0}, {"total", 0}});
    auto index = c.Get("/index.html");
    REQUIRE(index);
    CHECK(index->body == "<html>review</html>");
    svc.stop();
    CHECK(read_manifest(dir / "m.csv") == m);
}
