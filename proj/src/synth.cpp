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

#include "forge/synth.hpp"

#include "forge/errors.hpp"
#include "forge/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace forge {

namespace fs = std::filesystem;

namespace {

using Rgb = std::array<double, 3>;

enum class Motif { Filaments, BeadChains, Blobs, Dots, Branches };

struct Style {
    Rgb background;
    Rgb foreground;
    Motif motif;
    int count;
};

constexpr std::array<Style, kNumClasses> kStyles = {{
    {{200, 226, 200}, {40, 110, 50}, Motif::Filaments, 260},
    {{198, 210, 238}, {40, 60, 150}, Motif::BeadChains, 150},
    {{238, 204, 216}, {150, 30, 80}, Motif::Blobs, 60},
    {{236, 226, 188}, {130, 95, 20}, Motif::Dots, 1100},
    {{222, 206, 236}, {80, 30, 110}, Motif::Branches, 90},
}};

constexpr double kFaintGrain = 17.0;

class Canvas {
public:
    Canvas(int w, int h, Rgb fill) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h, fill) {}

    void disk(double cx, double cy, double r, const Rgb& c, double alpha = 1.0) {
        const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
        const int x1 = std::min(w_ - 1, static_cast<int>(std::ceil(cx + r)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
        const int y1 = std::min(h_ - 1, static_cast<int>(std::ceil(cy + r)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) blend(x, y, c, alpha);
            }
        }
    }

    void segment(double ax, double ay, double bx, double by, double width, const Rgb& c) {
        const double half = width / 2.0;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - half)));
        const int x1 = std::min(w_ - 1, static_cast<int>(std::ceil(std::max(ax, bx) + half)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - half)));
        const int y1 = std::min(h_ - 1, static_cast<int>(std::ceil(std::max(ay, by) + half)));
        const double dx = bx - ax, dy = by - ay;
        const double len2 = std::max(dx * dx + dy * dy, 1e-9);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double t = std::clamp(((x - ax) * dx + (y - ay) * dy) / len2, 0.0, 1.0);
                const double ex = ax + t * dx - x, ey = ay + t * dy - y;
                if (ex * ex + ey * ey <= half * half) blend(x, y, c, 1.0);
            }
        }
    }

    Rgb& at(int x, int y) { return px_[static_cast<std::size_t>(y) * w_ + x]; }

    ImageBuffer finish(Xoshiro256& rng, double noise) const {
        ImageBuffer img(w_, h_);
        auto out = img.data();
        for (std::size_t i = 0; i < px_.size(); ++i) {
            const double n = noise > 0 ? rng.uniform(-noise, noise) : 0.0;
            for (int c = 0; c < 3; ++c) {
                out[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::lround(px_[i][c] + n), 0L, 255L));
            }
        }
        return img;
    }

private:
    void blend(int x, int y, const Rgb& c, double alpha) {
        Rgb& p = at(x, y);
        for (int i = 0; i < 3; ++i) p[i] = p[i] * (1.0 - alpha) + c[i] * alpha;
    }

    int w_, h_;
    std::vector<Rgb> px_;
};

void draw_motif(Canvas& canvas, const Style& style, int w, int h, Xoshiro256& rng) {
    const double scale = std::min(w, h) / 750.0;
    const double area = static_cast<double>(w) * h / (1000.0 * 750.0);
    const int count = std::max(1, static_cast<int>(std::lround(style.count * area)));
    for (int i = 0; i < count; ++i) {
        const double x = rng.uniform(0, w), y = rng.uniform(0, h);
        const double angle = rng.uniform(0, 2 * M_PI);
        switch (style.motif) {
            case Motif::Filaments: {
                const double len = rng.uniform(150, 300) * scale;
                canvas.segment(x, y, x + len * std::cos(angle), y + len * std::sin(angle), 2.5 * scale,
                               style.foreground);
                break;
            }
            case Motif::BeadChains: {
                const int beads = 6 + static_cast<int>(rng.below(6));
                for (int b = 0; b < beads; ++b) {
                    canvas.disk(x + b * 13 * scale * std::cos(angle), y + b * 13 * scale * std::sin(angle),
                                6 * scale, style.foreground);
                }
                break;
            }
            case Motif::Blobs:
                canvas.disk(x, y, rng.uniform(18, 42) * scale, style.foreground, 0.85);
                break;
            case Motif::Dots:
                canvas.disk(x, y, rng.uniform(3, 5.5) * scale, style.foreground);
                break;
            case Motif::Branches: {
                const double len = rng.uniform(80, 160) * scale;
                const double ex = x + len * std::cos(angle), ey = y + len * std::sin(angle);
                canvas.segment(x, y, ex, ey, 7 * scale, style.foreground);
                const double a2 = angle + rng.uniform(0.4, 0.9);
                canvas.segment(ex, ey, ex + 0.6 * len * std::cos(a2), ey + 0.6 * len * std::sin(a2), 5 * scale,
                               style.foreground);
                break;
            }
        }
    }
}

}  // namespace

SynthArtifact synth_artifact_for(int index) noexcept {
    switch (index % 3) {
        case 1: return SynthArtifact::LensContour;
        case 2: return SynthArtifact::BlankCorner;
        default: return SynthArtifact::None;
    }
}

ImageBuffer synth_image(ClassLabel label, int width, int height, SynthArtifact artifact, std::uint64_t seed) {
    if (width < 8 || height < 8) throw ShapeMismatch("synthetic images need at least 8x8 pixels");
    const Style& style = kStyles[static_cast<std::size_t>(label)];
    Xoshiro256 rng(seed);
    Canvas canvas(width, height, style.background);
    draw_motif(canvas, style, width, height, rng);

    if (artifact == SynthArtifact::LensContour) {
        const double cx = width / 2.0, cy = height / 2.0, r = 0.42 * height;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) canvas.at(x, y) = {8, 8, 8};
            }
        }
    } else if (artifact == SynthArtifact::BlankCorner) {
        const int cw = width / 4, ch = height / 3;
        const Rgb white{246, 246, 244};
        for (int y = height - ch; y < height; ++y) {
            for (int x = width - cw; x < width; ++x) canvas.at(x, y) = white;
            // Faint cell: grain just above the blank threshold.
            for (int x = 0; x < cw; ++x) {
                const double grain = rng.uniform(-kFaintGrain, kFaintGrain);
                canvas.at(x, y) = {226 + grain, 226 + grain, 222 + grain};
            }
        }
    }
    return canvas.finish(rng, 6.0);
}

SourceLabels write_synthetic_corpus(const fs::path& dir, const SynthOptions& options) {
    if (options.images_per_class < 1) throw ConfigError("images_per_class must be >= 1");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    SourceLabels labels;
    for (ClassLabel label : kAllClasses) {
        for (int i = 0; i < options.images_per_class; ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%02d.jpg", std::string(to_string(label)).c_str(), i);
            const auto seed = derive_seed(options.seed, {static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(i)});
            const auto img = synth_image(label, options.width, options.height, synth_artifact_for(i), seed);
            write_jpeg(img, dir / name, options.jpeg_quality);
            labels[name] = label;
        }
    }
    write_source_labels(dir / "labels.csv", labels);
    return labels;
}

}  // namespace forge
