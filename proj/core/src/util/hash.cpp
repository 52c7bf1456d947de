#include "editforge/util/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "editforge/error.hpp"

namespace editforge {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

struct DigestCtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using DigestCtx = std::unique_ptr<EVP_MD_CTX, DigestCtxDeleter>;

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw Error(ErrorCategory::internal, "sha256: digest init failed");
    }

    void update(std::string_view data) {
        EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
    }

    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        std::string out;
        out.reserve(len * 2);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(kHexDigits[md[i] >> 4]);
            out.push_back(kHexDigits[md[i] & 0xF]);
        }
        return out;
    }

private:
    DigestCtx ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data);
    return h.hex();
}

std::string content_id(std::initializer_list<std::string_view> fields) {
    Sha256 h;
    for (std::string_view f : fields) {
        std::string prefix = std::to_string(f.size()) + ":";
        h.update(prefix);
        h.update(f);
    }
    return h.hex().substr(0, 16);
}

}  // namespace editforge
