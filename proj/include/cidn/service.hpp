/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file service.hpp
 * @brief HTTP inference service over one loaded checkpoint.
 *
 * Endpoints (JSON bodies, CORS enabled):
 *
 *     POST /api/enhance   multipart parts "low" and "guidance" (PNG or JPEG)
 *         200 {"image": <base64 PNG>, "width", "height", "guidance_histogram": [256],
 *              "output_histogram": [256], "alignment", "checkpoint_id", "elapsed_ms"}
 *         400 {"error", "part"}   missing or undecodable part
 *         413 {"error", "part"}   part above the pixel cap
 *         503 {"error"}           no checkpoint loaded
 *     GET /api/health     200 {"status": "ok", "checkpoint_id"} or 503 {"status": "loading"}
 *     GET /api/gallery    200 {"images": [{"id", "thumbnail", "mean_luminance", "width", "height"}]}
 *                         sorted by mean luminance, thumbnails at most 128 px on the long side
 *
 * Low-light inputs whose sides are not multiples of 4 are reflect-padded,
 * enhanced, and cropped back.
 */

#pragma once

#include "cidn/image.hpp"
#include "cidn/model.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace cidn::service {

struct ServiceConfig {
    std::filesystem::path gallery_dir;
    /// Upper bound on height * width of either uploaded image.
    int64_t max_pixels = 4096 * 4096;
    /// Simultaneous inferences; further requests wait.
    int max_concurrent = 2;
};

struct Reply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

struct GalleryEntry {
    std::string id;
    std::string thumbnail_png;
    double mean_luminance = 0.0;
    int64_t width = 0;
    int64_t height = 0;
};

/// Reads every PNG/JPEG in dir (non-recursive), sorted by mean luminance then id.
/// A missing or empty directory yields an empty list.
std::vector<GalleryEntry> load_gallery(const std::filesystem::path& dir);

/// enhance() for arbitrary low-light sizes: reflect-pad to a multiple of 4, enhance, crop back.
Image enhance_padded(const Image& low, const Image& guidance, const ModelState& state);

class InferenceService {
public:
    explicit InferenceService(ServiceConfig config);

    /// Throws IoError / CheckpointError; the previous model (if any) stays active on failure.
    void load(const std::filesystem::path& checkpoint);
    bool ready() const;
    std::string checkpoint_id() const;

    Reply health() const;
    Reply gallery() const;
    /// Parts are the raw uploaded bytes; nullopt when the part is absent.
    Reply enhance(const std::optional<std::string>& low, const std::optional<std::string>& guidance) const;

    /// Registers the routes and CORS handling on `server`.
    void mount(httplib::Server& server) const;

private:
    ServiceConfig config_;
    std::vector<GalleryEntry> gallery_;
    mutable std::mutex mutex_;
    std::shared_ptr<const ModelState> model_;
    std::string checkpoint_id_;
    mutable std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

} // namespace cidn::service
