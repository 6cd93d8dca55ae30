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

#include "forge/artifact_filter.hpp"
#include "forge/errors.hpp"
#include "forge/manifest.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace forge;
using forge::test::TempDir;

TEST_CASE("labels: names round trip") {
    for (ClassLabel c : kAllClasses) CHECK(parse_class(to_string(c)) == c);
    for (Verdict v : kAllVerdicts) CHECK(parse_verdict(to_string(v)) == v);
    CHECK_FALSE(parse_class("XYZ").has_value());
    CHECK(is_eligible(Verdict::ManualKeep));
    CHECK_FALSE(is_eligible(Verdict::NeedsReview));
}

TEST_CASE("manifest: CSV round trip and sorting") {
    Manifest m;
    m.rows.push_back({"b_r0_c1", "b.jpg", ClassLabel::SHC, Verdict::NeedsReview, Split::Train, 3});
    m.rows.push_back({"a_r1_c0", "a.jpg", ClassLabel::BBH, Verdict::ManualReject, Split::Unassigned, {}});
    m.sort_and_validate();
    CHECK(m.rows[0].patch_id == "a_r1_c0");
    const auto text = format_manifest(m);
    CHECK(text.rfind(kManifestHeader, 0) == 0);
    CHECK(parse_manifest(text) == m);

    TempDir dir;
    write_manifest(dir / "m.csv", m);
    CHECK(read_manifest(dir / "m.csv") == m);
    CHECK(m.eligible_count() == 0);
    REQUIRE(m.find("b_r0_c1"));
    CHECK(m.find("b_r0_c1")->fold == 3);
}

TEST_CASE("manifest: malformed input") {
    CHECK_THROWS_AS(parse_manifest("id,class\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest(std::string(kManifestHeader) + "\nx,x.jpg,TSH,bogus,unassigned,\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest(std::string(kManifestHeader) + "\nx,x.jpg,TSH,keep,unassigned,\nx,x.jpg,TSH,keep,unassigned,\n"),
                    DuplicatePatchId);
}

TEST_CASE("source_stem_of") {
    CHECK(source_stem_of("img042_r7_c10") == "img042");
    CHECK(source_stem_of("a_b_r0_c0") == "a_b");
    CHECK_FALSE(source_stem_of("img042").has_value());
    CHECK_FALSE(source_stem_of("img_rx_c1").has_value());
}

TEST_CASE("label_inventory: reference counts") {
    SourceLabels labels;
    int n = 0;
    for (ClassLabel c : kAllClasses) {
        for (int i = 0; i < kReferenceRawCounts[static_cast<std::size_t>(c)]; ++i) {
            labels["img" + std::to_string(n++) + ".jpg"] = c;
        }
    }
    const auto inv = label_inventory(labels);
    CHECK(inv == std::array<int, kNumClasses>{227, 117, 36, 144, 75});
    CHECK(n == 599);
}

TEST_CASE("build_manifest: resolves sources, rejects unlabeled and duplicates") {
    TempDir dir;
    const auto img = test::solid(4, 4, 1, 1, 1);
    write_png(img, dir / "a_r0_c0.png");
    write_png(img, dir / "a_r0_c1.png");
    write_png(img, dir / "b_r0_c0.png");
    SourceLabels labels{{"a.jpg", ClassLabel::GMA}, {"b.png", ClassLabel::TSH}};
    const auto m = build_manifest(dir.path(), labels);
    REQUIRE(m.rows.size() == 3);
    CHECK(m.rows[0].source_image == "a.jpg");
    CHECK(m.rows[2].label == ClassLabel::TSH);
    for (const auto& r : m.rows) CHECK(r.verdict == Verdict::Keep);

    FilterReport report;
    report.rows.push_back({"a_r0_c1", Verdict::RejectBlank, {}});
    CHECK(build_manifest(dir.path(), labels, &report).find("a_r0_c1")->verdict == Verdict::RejectBlank);

    write_png(img, dir / "c_r0_c0.png");
    CHECK_THROWS_AS(build_manifest(dir.path(), labels), UnlabeledSource);
    labels["c.jpg"] = ClassLabel::BBH;
    labels["c.png"] = ClassLabel::BBH;
    CHECK_THROWS_AS(build_manifest(dir.path(), labels), DuplicatePatchId);
}

TEST_CASE("source labels: file round trip") {
    TempDir dir;
    SourceLabels labels{{"x.jpg", ClassLabel::BASH}, {"y.jpg", ClassLabel::SHC}};
    write_source_labels(dir / "labels.csv", labels);
    CHECK(read_source_labels(dir / "labels.csv") == labels);
}
