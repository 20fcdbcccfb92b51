#include "groundkit/engine.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace groundkit::engine {
namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& context) {
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        throw std::runtime_error(context + ": malformed JSON");
    return value;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_json(buffer.str(), path);
}

geom::Box box_from_json(const json& value, const std::string& context) {
    if (!value.is_array() || value.size() != 4)
        throw std::runtime_error(context + ": box must be a 4-element array");
    geom::Box box{value[0].get<double>(), value[1].get<double>(), value[2].get<double>(),
                  value[3].get<double>()};
    geom::validate(box);
    return box;
}

json box_to_json(const geom::Box& box) {
    return json::array({box.xmin, box.ymin, box.xmax, box.ymax});
}

const char* phrase_kind_name(PhraseKind kind) {
    return kind == PhraseKind::kCategoryName ? "category-name" : "descriptive";
}

PhraseKind phrase_kind_from_name(const std::string& name, const std::string& context) {
    if (name == "category-name") return PhraseKind::kCategoryName;
    if (name == "descriptive") return PhraseKind::kDescriptive;
    throw std::runtime_error(context + ": unknown phrase kind '" + name + "'");
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream stream(text);
    std::string word;
    while (stream >> word) words.push_back(word);
    return words;
}

// Retries transport failures; semantic validation happens at the call site.
template <typename Call>
auto with_retries(Call&& call, int retries, std::size_t& retry_count)
    -> decltype(call()) {
    for (int attempt = 0;; ++attempt) {
        try {
            return call();
        } catch (const std::exception&) {
            if (attempt >= retries) throw;
            ++retry_count;
        }
    }
}

bool tags_admit(const ManifestEntry& entry, const EngineConfig& config) {
    for (const std::string& tag : entry.tags)
        if (std::find(config.deny_tags.begin(), config.deny_tags.end(), tag) !=
            config.deny_tags.end())
            return false;
    if (config.allow_tags.empty()) return true;
    for (const std::string& tag : entry.tags)
        if (std::find(config.allow_tags.begin(), config.allow_tags.end(), tag) !=
            config.allow_tags.end())
            return true;
    return false;
}

bool box_inside_frame(const geom::Box& box, const ManifestEntry& entry) {
    return box.xmin >= 0.0 && box.ymin >= 0.0 && box.xmax <= entry.width &&
           box.ymax <= entry.height;
}

// Produces the record for one admitted image. Pure apart from client calls,
// so images can be prepared on worker threads and committed in order.
std::optional<ImageRecord> process_image(const ManifestEntry& entry, StageClient& client,
                                         const EngineConfig& config, RunStats& stats) {
    if (!tags_admit(entry, config)) {
        ++stats.images_skipped;
        return std::nullopt;
    }

    ImageRecord record;
    record.id = entry.id;
    record.caption =
        with_retries([&] { return client.caption(entry); }, config.retries, stats.stage_retries);

    std::vector<NounPhrase> phrases = extract_phrases(record.caption);
    stats.phrases_found += phrases.size();
    for (const NounPhrase& phrase : phrases) {
        if (is_abstract_phrase(phrase.text, config.abstract_blocklist)) {
            ++stats.phrases_abstract;
            continue;
        }
        std::vector<GroundedRegion> regions = with_retries(
            [&] { return client.ground(entry, phrase.text); }, config.retries,
            stats.stage_retries);
        for (const GroundedRegion& region : regions) {
            if (region.score < config.ground_score_threshold) {
                ++stats.regions_below_threshold;
                continue;
            }
            if (!geom::is_valid(region.box) || !box_inside_frame(region.box, entry)) {
                ++stats.regions_out_of_frame;
                continue;
            }
            if (region.box.xmax - region.box.xmin < config.min_region_width ||
                region.box.ymax - region.box.ymin < config.min_region_height) {
                ++stats.regions_too_small;
                continue;
            }

            std::string detail = with_retries(
                [&] { return client.region_caption(entry, phrase.text, region.box); },
                config.retries, stats.stage_retries);
            if (!is_single_sentence(detail)) {
                ++stats.regions_bad_detail;
                continue;
            }
            std::string referring = with_retries(
                [&] { return client.rewrite_referring(phrase.text, detail); }, config.retries,
                stats.stage_retries);
            if (!is_valid_referring(referring)) {
                ++stats.regions_bad_referring;
                continue;
            }

            record.regions.push_back(
                {region.box, region.score, phrase.text, phrase.kind, detail, referring});
            ++stats.regions_kept;
        }
    }
    return record;
}

void merge_stats(RunStats& into, const RunStats& from) {
    into.images_committed += from.images_committed;
    into.images_skipped += from.images_skipped;
    into.phrases_found += from.phrases_found;
    into.phrases_abstract += from.phrases_abstract;
    into.regions_kept += from.regions_kept;
    into.regions_below_threshold += from.regions_below_threshold;
    into.regions_out_of_frame += from.regions_out_of_frame;
    into.regions_too_small += from.regions_too_small;
    into.regions_bad_detail += from.regions_bad_detail;
    into.regions_bad_referring += from.regions_bad_referring;
    into.stage_retries += from.stage_retries;
}

std::optional<std::string> last_nonempty_line(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    if (last.empty()) return std::nullopt;
    return last;
}

} // namespace

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);

    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        const std::string context = path + ":" + std::to_string(line_number);
        json value = parse_json(line, context);
        ManifestEntry entry;
        entry.id = value.at("id").get<std::string>();
        entry.uri = value.value("uri", "");
        entry.width = value.at("width").get<double>();
        entry.height = value.at("height").get<double>();
        if (value.contains("tags"))
            entry.tags = value.at("tags").get<std::vector<std::string>>();
        if (entry.id.empty()) throw std::runtime_error(context + ": empty image id");
        if (!(entry.width > 0.0) || !(entry.height > 0.0))
            throw std::runtime_error(context + ": image dimensions must be positive");
        if (!seen.insert(entry.id).second)
            throw std::runtime_error(context + ": duplicate image id '" + entry.id + "'");
        entries.push_back(std::move(entry));
    }
    return entries;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# groundkit manifest v1\n";
    for (const ManifestEntry& entry : entries) {
        json value{{"height", entry.height},
                   {"id", entry.id},
                   {"tags", entry.tags},
                   {"uri", entry.uri},
                   {"width", entry.width}};
        out << value.dump() << '\n';
    }
    if (!out) throw std::runtime_error("manifest write failed: " + path);
}

std::vector<NounPhrase> extract_phrases(const std::string& caption) {
    std::vector<NounPhrase> phrases;
    std::set<std::string> seen;
    std::vector<std::string> current;

    auto flush = [&]() {
        if (current.empty()) return;
        std::string text;
        for (std::size_t i = 0; i < current.size(); ++i) {
            if (i > 0) text += ' ';
            text += current[i];
        }
        if (seen.insert(text).second)
            phrases.push_back({text, current.size() <= 2 ? PhraseKind::kCategoryName
                                                         : PhraseKind::kDescriptive});
        current.clear();
    };

    std::string word;
    auto take_word = [&]() {
        if (word.empty()) return;
        while (!word.empty() && word.front() == '-') word.erase(word.begin());
        while (!word.empty() && word.back() == '-') word.pop_back();
        if (!word.empty()) {
            if (is_closed_class_word(word))
                flush();
            else
                current.push_back(word);
        }
        word.clear();
    };

    for (unsigned char c : caption) {
        if (std::isalnum(c) || c == '-') {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            take_word();
            if (!std::isspace(c)) flush();  // punctuation always ends a phrase
        }
    }
    take_word();
    flush();
    return phrases;
}

bool is_abstract_phrase(const std::string& phrase, const std::vector<std::string>& blocklist) {
    std::vector<std::string> words = split_words(phrase);
    if (words.empty()) return true;
    const std::string& head = words.back();
    return std::find(blocklist.begin(), blocklist.end(), head) != blocklist.end();
}

bool is_single_sentence(const std::string& text) {
    std::string trimmed = text;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
        trimmed.pop_back();
    if (trimmed.empty()) return false;
    const char last = trimmed.back();
    if (last != '.' && last != '!' && last != '?') return false;
    std::size_t terminators = 0;
    for (char c : trimmed)
        if (c == '.' || c == '!' || c == '?') ++terminators;
    return terminators == 1;
}

bool is_valid_referring(const std::string& text) {
    if (text.find(',') != std::string::npos) return false;
    const std::size_t words = split_words(text).size();
    return words > 5 && words < 10;
}

ReplayClient::ReplayClient(const std::string& fixture_path) {
    json fixture = load_json_file(fixture_path);
    if (fixture.contains("caption"))
        for (const auto& [key, value] : fixture.at("caption").items())
            captions_[key] = value.get<std::string>();
    if (fixture.contains("ground")) {
        for (const auto& [key, value] : fixture.at("ground").items()) {
            std::vector<GroundedRegion> regions;
            for (const json& item : value)
                regions.push_back({box_from_json(item.at("box"), fixture_path + " ground " + key),
                                   item.at("score").get<double>()});
            grounded_[key] = std::move(regions);
        }
    }
    if (fixture.contains("region_caption"))
        for (const auto& [key, value] : fixture.at("region_caption").items())
            region_captions_[key] = value.get<std::string>();
    if (fixture.contains("rewrite"))
        for (const auto& [key, value] : fixture.at("rewrite").items())
            rewrites_[key] = value.get<std::string>();
}

std::string ReplayClient::caption(const ManifestEntry& image) {
    auto it = captions_.find(image.id);
    if (it == captions_.end())
        throw std::runtime_error("no caption fixture for image '" + image.id + "'");
    return it->second;
}

std::vector<GroundedRegion> ReplayClient::ground(const ManifestEntry& image,
                                                 const std::string& phrase) {
    auto it = grounded_.find(image.id + "|" + phrase);
    if (it == grounded_.end()) return {};
    return it->second;
}

std::string ReplayClient::region_caption(const ManifestEntry& image, const std::string& phrase,
                                         const geom::Box&) {
    auto it = region_captions_.find(image.id + "|" + phrase);
    if (it == region_captions_.end())
        throw std::runtime_error("no region caption fixture for image '" + image.id +
                                 "' phrase '" + phrase + "'");
    return it->second;
}

std::string ReplayClient::rewrite_referring(const std::string& phrase,
                                            const std::string& detail) {
    auto it = rewrites_.find(phrase + "|" + detail);
    if (it == rewrites_.end())
        throw std::runtime_error("no rewrite fixture for phrase '" + phrase + "'");
    return it->second;
}

struct HttpStageClient::Impl {
    httplib::Client client;
    std::mutex mutex;

    Impl(const std::string& host, int port, int timeout_ms) : client(host, port) {
        client.set_connection_timeout(0, timeout_ms * 1000);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    }

    json post(const std::string& endpoint, const json& body) {
        std::lock_guard<std::mutex> lock(mutex);
        httplib::Result result = client.Post(endpoint, body.dump(), "application/json");
        if (!result)
            throw std::runtime_error("stage call " + endpoint + " failed: " +
                                     httplib::to_string(result.error()));
        if (result->status != 200)
            throw std::runtime_error("stage call " + endpoint + " returned status " +
                                     std::to_string(result->status));
        return parse_json(result->body, "response from " + endpoint);
    }
};

HttpStageClient::HttpStageClient(const std::string& host, int port, int timeout_ms)
    : impl_(std::make_unique<Impl>(host, port, timeout_ms)) {}

HttpStageClient::~HttpStageClient() = default;

std::string HttpStageClient::caption(const ManifestEntry& image) {
    json body{{"height", image.height}, {"id", image.id}, {"uri", image.uri},
              {"width", image.width}};
    return impl_->post("/caption", body).at("caption").get<std::string>();
}

std::vector<GroundedRegion> HttpStageClient::ground(const ManifestEntry& image,
                                                    const std::string& phrase) {
    json body{{"id", image.id}, {"phrase", phrase}};
    json response = impl_->post("/ground", body);
    std::vector<GroundedRegion> regions;
    for (const json& item : response.at("regions"))
        regions.push_back(
            {box_from_json(item.at("box"), "/ground response"), item.at("score").get<double>()});
    return regions;
}

std::string HttpStageClient::region_caption(const ManifestEntry& image,
                                            const std::string& phrase, const geom::Box& box) {
    json body{{"box", box_to_json(box)}, {"id", image.id}, {"phrase", phrase}};
    return impl_->post("/region_caption", body).at("caption").get<std::string>();
}

std::string HttpStageClient::rewrite_referring(const std::string& phrase,
                                               const std::string& detail) {
    json body{{"detail", detail}, {"phrase", phrase}};
    return impl_->post("/rewrite", body).at("referring").get<std::string>();
}

std::vector<std::string> EngineConfig::default_abstract_blocklist() {
    return {"image",      "picture", "photo",   "photograph", "background",
            "foreground", "scene",   "view",    "atmosphere", "setting",
            "closeup",    "shot",    "composition"};
}

EngineConfig read_engine_config(const std::string& path) {
    json value = load_json_file(path);
    EngineConfig config;
    for (const auto& [key, item] : value.items()) {
        if (key == "ground_score_threshold") {
            config.ground_score_threshold = item.get<double>();
        } else if (key == "retries") {
            config.retries = item.get<int>();
        } else if (key == "min_region_width") {
            config.min_region_width = item.get<double>();
        } else if (key == "min_region_height") {
            config.min_region_height = item.get<double>();
        } else if (key == "allow_tags") {
            config.allow_tags = item.get<std::vector<std::string>>();
        } else if (key == "deny_tags") {
            config.deny_tags = item.get<std::vector<std::string>>();
        } else if (key == "abstract_blocklist") {
            config.abstract_blocklist = item.get<std::vector<std::string>>();
        } else if (key == "jobs") {
            config.jobs = item.get<int>();
        } else if (key == "stop_after_images") {
            config.stop_after_images = item.get<std::size_t>();
        } else {
            throw std::runtime_error(path + ": unknown config key '" + key + "'");
        }
    }
    if (config.retries < 0) throw std::runtime_error(path + ": retries must be >= 0");
    if (config.jobs < 1) throw std::runtime_error(path + ": jobs must be >= 1");
    return config;
}

std::string serialize_image_record(const ImageRecord& record) {
    json regions = json::array();
    for (const RegionRecord& region : record.regions) {
        regions.push_back(json{{"box", box_to_json(region.box)},
                               {"detail", region.detail},
                               {"kind", phrase_kind_name(region.kind)},
                               {"phrase", region.phrase},
                               {"referring", region.referring},
                               {"score", region.score}});
    }
    json value{{"caption", record.caption}, {"id", record.id}, {"regions", regions}};
    return value.dump();
}

ImageRecord parse_image_record(const std::string& line) {
    json value = parse_json(line, "image record");
    ImageRecord record;
    record.id = value.at("id").get<std::string>();
    record.caption = value.at("caption").get<std::string>();
    for (const json& item : value.at("regions")) {
        RegionRecord region;
        region.box = box_from_json(item.at("box"), "image record region");
        region.score = item.at("score").get<double>();
        region.phrase = item.at("phrase").get<std::string>();
        region.kind = phrase_kind_from_name(item.at("kind").get<std::string>(), "image record");
        region.detail = item.at("detail").get<std::string>();
        region.referring = item.at("referring").get<std::string>();
        record.regions.push_back(std::move(region));
    }
    return record;
}

std::vector<ImageRecord> read_triplets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<ImageRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        records.push_back(parse_image_record(line));
    }
    return records;
}

RunStats run_engine(const std::vector<ManifestEntry>& manifest, StageClient& client,
                    const EngineConfig& config, const std::string& store_path,
                    const std::string& checkpoint_path) {
    namespace fs = std::filesystem;
    if (config.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

    // Figure out where to pick up. A resume needs both files; the store is
    // cut back to the last offset the checkpoint vouches for.
    std::size_t start = 0;
    bool resuming = false;
    if (fs::exists(store_path) && fs::exists(checkpoint_path)) {
        std::optional<std::string> last = last_nonempty_line(checkpoint_path);
        if (last) {
            json state = parse_json(*last, checkpoint_path);
            const std::string last_id = state.at("image").get<std::string>();
            const auto offset = state.at("offset").get<std::uint64_t>();
            auto it = std::find_if(manifest.begin(), manifest.end(),
                                   [&](const ManifestEntry& e) { return e.id == last_id; });
            if (it == manifest.end())
                throw std::runtime_error("checkpoint names image '" + last_id +
                                         "' which is not in the manifest");
            if (offset > fs::file_size(store_path))
                throw std::runtime_error("checkpoint offset lies beyond the store");
            {
                std::ifstream in(store_path);
                std::string header;
                if (!std::getline(in, header) || header != kTripletHeader)
                    throw std::runtime_error("store file lacks the expected header: " +
                                             store_path);
            }
            fs::resize_file(store_path, offset);
            start = static_cast<std::size_t>(it - manifest.begin()) + 1;
            resuming = true;
        }
    }

    std::ofstream store;
    std::ofstream checkpoint;
    if (resuming) {
        store.open(store_path, std::ios::app);
        checkpoint.open(checkpoint_path, std::ios::app);
    } else {
        store.open(store_path, std::ios::trunc);
        checkpoint.open(checkpoint_path, std::ios::trunc);
        store << kTripletHeader << '\n';
        store.flush();
    }
    if (!store) throw std::runtime_error("cannot open store: " + store_path);
    if (!checkpoint) throw std::runtime_error("cannot open checkpoint: " + checkpoint_path);

    const std::size_t pending = manifest.size() - start;
    std::vector<std::optional<ImageRecord>> prepared(pending);
    std::vector<RunStats> prepared_stats(pending);

    auto prepare = [&](std::size_t slot) {
        prepared[slot] =
            process_image(manifest[start + slot], client, config, prepared_stats[slot]);
    };

    RunStats stats;
    std::uint64_t offset = static_cast<std::uint64_t>(fs::file_size(store_path));

    auto commit = [&](std::size_t slot) {
        merge_stats(stats, prepared_stats[slot]);
        if (prepared[slot]) {
            store << serialize_image_record(*prepared[slot]) << '\n';
            store.flush();
            if (!store) throw std::runtime_error("store write failed: " + store_path);
            offset = static_cast<std::uint64_t>(fs::file_size(store_path));
            ++stats.images_committed;
        }
        json line{{"image", manifest[start + slot].id}, {"offset", offset}};
        checkpoint << line.dump() << '\n';
        checkpoint.flush();
        if (!checkpoint)
            throw std::runtime_error("checkpoint write failed: " + checkpoint_path);
    };

    auto reached_limit = [&]() {
        return config.stop_after_images > 0 && stats.images_committed >= config.stop_after_images;
    };

    if (config.jobs == 1 || pending <= 1) {
        for (std::size_t slot = 0; slot < pending && !reached_limit(); ++slot) {
            prepare(slot);
            commit(slot);
        }
    } else {
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(config.jobs), pending);
        std::vector<std::exception_ptr> failures(workers);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    for (std::size_t slot = w; slot < pending; slot += workers) prepare(slot);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
        for (std::thread& thread : pool) thread.join();
        for (const std::exception_ptr& failure : failures)
            if (failure) std::rethrow_exception(failure);
        for (std::size_t slot = 0; slot < pending && !reached_limit(); ++slot) commit(slot);
    }
    return stats;
}

} // namespace groundkit::engine
