/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/service.hpp"
#include "cidn/checkpoint.hpp"
#include "cidn/errors.hpp"
#include "cidn/log.hpp"
#include "cidn/metrics.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iterator>
#include <variant>

namespace cidn::service {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int64_t kThumbnailEdge = 128;

Reply json_reply(int status, const json& body) {
    return {status, body.dump(), "application/json"};
}

Reply part_error(int status, const std::string& part, const std::string& message) {
    return json_reply(status, {{"error", message}, {"part", part}});
}

bool is_image_file(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

/// Decodes one uploaded part, enforcing the pixel cap before decoding.
std::variant<Image, Reply> decode_part(const std::optional<std::string>& bytes, const std::string& name,
                                       int64_t max_pixels) {
    if (!bytes || bytes->empty())
        return part_error(400, name, "missing part '" + name + "'");
    int64_t h = 0, w = 0;
    if (peek_dimensions(*bytes, h, w) && h * w > max_pixels)
        return part_error(413, name,
                          "part '" + name + "' is " + std::to_string(w) + "x" + std::to_string(h) +
                              ", above the cap of " + std::to_string(max_pixels) + " pixels");
    try {
        auto image = decode_image(*bytes);
        if (image.height() * image.width() > max_pixels)
            return part_error(413, name, "part '" + name + "' exceeds the pixel cap");
        return image;
    } catch (const FormatError& e) {
        return part_error(400, name, "cannot decode part '" + name + "': " + e.what());
    }
}

} // namespace

std::vector<GalleryEntry> load_gallery(const fs::path& dir) {
    std::vector<GalleryEntry> entries;
    if (dir.empty() || !fs::is_directory(dir))
        return entries;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image_file(e.path()))
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            auto image = read_image(f);
            entries.push_back({f.stem().string(), encode_png(fit_within(image, kThumbnailEdge)), image.mean_luminance(),
                               image.width(), image.height()});
        } catch (const std::exception& e) {
            log::warn("skipping gallery file " + f.string() + ": " + e.what());
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.mean_luminance < b.mean_luminance;
    });
    return entries;
}

Image enhance_padded(const Image& low, const Image& guidance, const ModelState& state) {
    const auto h = low.height();
    const auto w = low.width();
    const auto ph = (ArchConfig::stride - h % ArchConfig::stride) % ArchConfig::stride;
    const auto pw = (ArchConfig::stride - w % ArchConfig::stride) % ArchConfig::stride;
    if (ph == 0 && pw == 0)
        return enhance(low, guidance, state);
    if (ph >= h || pw >= w)
        throw ShapeError("image " + std::to_string(w) + "x" + std::to_string(h) + " too small to pad");
    namespace F = torch::nn::functional;
    auto padded = F::pad(low.batched(), F::PadFuncOptions({0, pw, 0, ph}).mode(torch::kReflect));
    auto out = enhance(Image(padded), guidance, state);
    return Image(out.tensor().narrow(1, 0, h).narrow(2, 0, w).contiguous());
}

InferenceService::InferenceService(ServiceConfig config)
    : config_(std::move(config)), gallery_(load_gallery(config_.gallery_dir)),
      slots_(std::make_unique<std::counting_semaphore<1024>>(std::clamp(config_.max_concurrent, 1, 1024))) {
    if (config_.max_pixels < 1)
        throw std::invalid_argument("max_pixels must be >= 1");
}

void InferenceService::load(const fs::path& checkpoint) {
    std::ifstream in(checkpoint, std::ios::binary);
    if (!in)
        throw IoError("cannot read checkpoint '" + checkpoint.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::shared_ptr<const ModelState> model;
    try {
        model = std::make_shared<const ModelState>(state_from_bytes(bytes));
    } catch (const CheckpointError& e) {
        throw CheckpointError(checkpoint.string() + ": " + e.what());
    }
    auto id = cidn::checkpoint_id(checkpoint, bytes);
    std::lock_guard lock(mutex_);
    model_ = std::move(model);
    checkpoint_id_ = std::move(id);
    log::info("serving checkpoint " + checkpoint_id_);
}

bool InferenceService::ready() const {
    std::lock_guard lock(mutex_);
    return model_ != nullptr;
}

std::string InferenceService::checkpoint_id() const {
    std::lock_guard lock(mutex_);
    return checkpoint_id_;
}

Reply InferenceService::health() const {
    std::lock_guard lock(mutex_);
    if (!model_)
        return json_reply(503, {{"status", "loading"}});
    return json_reply(200, {{"status", "ok"}, {"checkpoint_id", checkpoint_id_}});
}

Reply InferenceService::gallery() const {
    json images = json::array();
    for (const auto& e : gallery_)
        images.push_back({{"id", e.id},
                          {"thumbnail", httplib::detail::base64_encode(e.thumbnail_png)},
                          {"mean_luminance", e.mean_luminance},
                          {"width", e.width},
                          {"height", e.height}});
    return json_reply(200, {{"images", images}});
}

Reply InferenceService::enhance(const std::optional<std::string>& low_bytes,
                                const std::optional<std::string>& guidance_bytes) const {
    const auto start = std::chrono::steady_clock::now();
    std::shared_ptr<const ModelState> model;
    std::string id;
    {
        std::lock_guard lock(mutex_);
        model = model_;
        id = checkpoint_id_;
    }
    if (!model)
        return json_reply(503, {{"error", "no checkpoint loaded"}});

    auto low = decode_part(low_bytes, "low", config_.max_pixels);
    if (auto* r = std::get_if<Reply>(&low))
        return *r;
    auto guidance = decode_part(guidance_bytes, "guidance", config_.max_pixels);
    if (auto* r = std::get_if<Reply>(&guidance))
        return *r;
    const auto& low_image = std::get<Image>(low);
    const auto& guidance_image = std::get<Image>(guidance);

    Image output;
    slots_->acquire();
    try {
        output = enhance_padded(low_image, guidance_image, *model);
    } catch (const ShapeError& e) {
        slots_->release();
        return json_reply(400, {{"error", e.what()}});
    } catch (...) {
        slots_->release();
        throw;
    }
    slots_->release();

    const auto h_guidance = metrics::luminance_histogram(guidance_image);
    const auto h_output = metrics::luminance_histogram(output);
    const auto elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return json_reply(200, {{"image", httplib::detail::base64_encode(encode_png(output))},
                            {"width", output.width()},
                            {"height", output.height()},
                            {"guidance_histogram", h_guidance},
                            {"output_histogram", h_output},
                            {"alignment", metrics::histogram_alignment(h_output, h_guidance)},
                            {"checkpoint_id", id},
                            {"elapsed_ms", elapsed}});
}

void InferenceService::mount(httplib::Server& server) const {
    auto send = [](httplib::Response& res, const Reply& r) { res.status = r.status; res.set_content(r.body, r.content_type); };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/api/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    server.Get("/api/gallery", [this, send](const httplib::Request&, httplib::Response& res) { send(res, gallery()); });
    server.Post("/api/enhance", [this, send](const httplib::Request& req, httplib::Response& res) {
        auto part = [&](const char* name) -> std::optional<std::string> {
            if (!req.has_file(name))
                return std::nullopt;
            return req.get_file_value(name).content;
        };
        try {
            send(res, enhance(part("low"), part("guidance")));
        } catch (const std::exception& e) {
            log::warn(std::string("enhance failed: ") + e.what());
            send(res, json_reply(500, {{"error", e.what()}}));
        }
    });
    server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, json_reply(500, {{"error", what}}));
    });
}

} // namespace cidn::service
