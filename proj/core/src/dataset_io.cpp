#include "galev/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "galev/errors.hpp"

namespace galev {

namespace {

using nlohmann::json;

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::string lowercased(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double_field(const std::string& token, const std::string& path, std::size_t line) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw FormatError(path + ":" + std::to_string(line) + ": cannot parse \"" + token +
                          "\" as a number");
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

} // namespace

GalleryManifest load_manifest(const std::string& path) {
    const json doc = parse_json_file(path);
    GalleryManifest manifest;
    try {
        manifest.num_classes = doc.at("num_classes").get<int>();
        manifest.class_names = doc.at("class_names").get<std::vector<std::string>>();
        for (const auto& album_doc : doc.at("albums")) {
            AlbumRecord album;
            album.album_id = album_doc.at("id").get<std::string>();
            for (const auto& label : album_doc.at("labels")) {
                album.labels.insert(label.get<int>());
            }
            for (const auto& photo_doc : album_doc.at("photos")) {
                PhotoRecord photo;
                photo.photo_id = photo_doc.at("id").get<std::string>();
                if (photo_doc.contains("lat") || photo_doc.contains("lon")) {
                    if (!photo_doc.contains("lat") || !photo_doc.contains("lon")) {
                        throw FormatError(path + ": photo \"" + photo.photo_id +
                                          "\" has only one of lat/lon");
                    }
                    photo.location = GeoPoint{photo_doc.at("lat").get<double>(),
                                              photo_doc.at("lon").get<double>()};
                }
                album.photos.push_back(std::move(photo));
            }
            manifest.albums.push_back(std::move(album));
        }
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    validate(manifest);
    return manifest;
}

void save_manifest(const GalleryManifest& manifest, const std::string& path) {
    json albums = json::array();
    for (const auto& album : manifest.albums) {
        json photos = json::array();
        for (const auto& photo : album.photos) {
            json p{{"id", photo.photo_id}};
            if (photo.location) {
                p["lat"] = photo.location->lat;
                p["lon"] = photo.location->lon;
            }
            photos.push_back(std::move(p));
        }
        albums.push_back(json{{"id", album.album_id},
                              {"labels", album.labels},
                              {"photos", std::move(photos)}});
    }
    const json doc{{"num_classes", manifest.num_classes},
                   {"class_names", manifest.class_names},
                   {"albums", std::move(albums)}};
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write file: " + path);
    out << doc.dump(2) << "\n";
}

FeatureStore load_feature_store(const std::string& path, const GalleryManifest& manifest) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "photo_id") {
        throw FormatError(path + ":1: header must be photo_id,f0,...");
    }
    const std::size_t dim = header.size() - 1;

    FeatureStore store;
    store.dim = dim;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != dim + 1) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(dim + 1) + " fields, got " +
                              std::to_string(fields.size()));
        }
        Vec v(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            v[i] = parse_double_field(fields[i + 1], path, line_no);
            if (!std::isfinite(v[i])) {
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": non-finite feature value for photo \"" + fields[0] +
                                      "\"");
            }
        }
        if (!store.vectors.emplace(fields[0], std::move(v)).second) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": duplicate photo id \"" + fields[0] + "\"");
        }
    }

    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) {
            if (!store.vectors.count(photo.photo_id)) {
                throw MissingFeatureError(photo.photo_id);
            }
        }
    }
    return store;
}

void save_feature_store(const FeatureStore& store, const GalleryManifest& manifest,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write file: " + path);
    out << "photo_id";
    for (std::size_t i = 0; i < store.dim; ++i) out << ",f" << i;
    out << "\n";
    char buf[64];
    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) {
            out << photo.photo_id;
            for (double x : store.at(photo.photo_id)) {
                std::snprintf(buf, sizeof buf, "%.17g", x);
                out << ',' << buf;
            }
            out << "\n";
        }
    }
}

CaptionStore load_caption_store(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);

    CaptionStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected photo_id<TAB>caption");
        }
        const std::string photo_id = line.substr(0, tab);
        if (photo_id.empty()) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": empty photo id");
        }
        std::vector<std::string> tokens;
        std::istringstream words(line.substr(tab + 1));
        std::string word;
        while (words >> word) {
            word = lowercased(word);
            if (word == "<start>" || word == "<end>") continue;
            tokens.push_back(std::move(word));
        }
        if (!store.captions.emplace(photo_id, std::move(tokens)).second) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": duplicate caption for photo \"" + photo_id + "\"");
        }
    }
    return store;
}

} // namespace galev
