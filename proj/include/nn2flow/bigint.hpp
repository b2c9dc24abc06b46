// Arbitrary-precision signed integers for the exact feasibility engine.
//
// Values that fit in int64 are stored inline; only results outside that range
// allocate a magnitude vector. Every operation is exact — there is no rounding
// or saturation anywhere.
#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace nn2flow {

class BigInt {
public:
    BigInt() = default;
    BigInt(int v) : small_(v) {}
    BigInt(long v) : small_(v) {}
    BigInt(long long v) : small_(v) {}
    BigInt(unsigned v) : small_(static_cast<std::int64_t>(v)) {}

    static BigInt from_i128(__int128 v) {
        BigInt r;
        if (v >= kMinI64 && v <= kMaxI64) {
            r.small_ = static_cast<std::int64_t>(v);
            return r;
        }
        int sign = v < 0 ? -1 : 1;
        unsigned __int128 mag = sign < 0 ? static_cast<unsigned __int128>(-(v + 1)) + 1
                                         : static_cast<unsigned __int128>(v);
        std::vector<std::uint32_t> limbs;
        while (mag != 0) {
            limbs.push_back(static_cast<std::uint32_t>(mag & 0xffffffffu));
            mag >>= 32;
        }
        r.big_ = std::make_shared<const Mag>(Mag{sign, std::move(limbs)});
        return r;
    }

    bool is_zero() const { return !big_ && small_ == 0; }
    // -1, 0 or +1
    int sign() const {
        if (big_) return big_->sign;
        return small_ < 0 ? -1 : (small_ > 0 ? 1 : 0);
    }

    bool fits_int64() const { return !big_; }
    std::int64_t to_int64() const {
        assert(!big_);
        return small_;
    }

    friend BigInt operator-(const BigInt& a) {
        if (!a.big_) {
            if (a.small_ != kMinI64) {
                BigInt r;
                r.small_ = -a.small_;
                return r;
            }
            return from_i128(-static_cast<__int128>(a.small_));
        }
        BigInt r;
        r.big_ = std::make_shared<const Mag>(Mag{-a.big_->sign, a.big_->limbs});
        return r;
    }

    friend BigInt operator+(const BigInt& a, const BigInt& b) {
        if (!a.big_ && !b.big_)
            return from_i128(static_cast<__int128>(a.small_) + b.small_);
        return add_signed(a.view(), b.view());
    }
    friend BigInt operator-(const BigInt& a, const BigInt& b) {
        if (!a.big_ && !b.big_)
            return from_i128(static_cast<__int128>(a.small_) - b.small_);
        View bv = b.view();
        bv.sign = -bv.sign;
        return add_signed(a.view(), bv);
    }
    friend BigInt operator*(const BigInt& a, const BigInt& b) {
        if (!a.big_ && !b.big_)
            return from_i128(static_cast<__int128>(a.small_) * b.small_);
        View av = a.view(), bv = b.view();
        if (av.sign == 0 || bv.sign == 0) return BigInt();
        std::vector<std::uint32_t> prod = mul_mag(av.limbs(), bv.limbs());
        return make(av.sign * bv.sign, std::move(prod));
    }

    BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
    BigInt& operator-=(const BigInt& o) { return *this = *this - o; }
    BigInt& operator*=(const BigInt& o) { return *this = *this * o; }

    // Truncated toward zero, like C integer division. b must be nonzero.
    friend BigInt operator/(const BigInt& a, const BigInt& b) { return divmod(a, b).first; }
    friend BigInt operator%(const BigInt& a, const BigInt& b) { return divmod(a, b).second; }

    // quotient truncated toward zero; remainder has the dividend's sign
    static std::pair<BigInt, BigInt> divmod(const BigInt& a, const BigInt& b) {
        assert(!b.is_zero());
        if (!a.big_ && !b.big_) {
            if (!(a.small_ == kMinI64 && b.small_ == -1)) {
                BigInt q, r;
                q.small_ = a.small_ / b.small_;
                r.small_ = a.small_ % b.small_;
                return {q, r};
            }
            return {from_i128(-static_cast<__int128>(kMinI64)), BigInt()};
        }
        View av = a.view(), bv = b.view();
        if (av.sign == 0) return {BigInt(), BigInt()};
        if (av.size <= 4 && bv.size <= 4) {
            unsigned __int128 am = mag128(av), bm = mag128(bv);
            BigInt q = from_u128(am / bm, av.sign * bv.sign);
            BigInt r = from_u128(am % bm, av.sign);
            return {q, r};
        }
        auto [qm, rm] = divmod_mag(av.limbs(), bv.limbs());
        BigInt q = make(av.sign * bv.sign, std::move(qm));
        BigInt r = make(av.sign, std::move(rm));
        return {q, r};
    }

    friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
    friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

    static int cmp(const BigInt& a, const BigInt& b) {
        if (!a.big_ && !b.big_) return a.small_ < b.small_ ? -1 : (a.small_ > b.small_ ? 1 : 0);
        View av = a.view(), bv = b.view();
        if (av.sign != bv.sign) return av.sign < bv.sign ? -1 : 1;
        int m = cmp_mag(av.limbs(), bv.limbs());
        return av.sign >= 0 ? m : -m;
    }

    BigInt abs() const { return sign() < 0 ? -*this : *this; }

    static BigInt gcd(const BigInt& a, const BigInt& b) {
        View av = a.view(), bv = b.view();
        if (av.size <= 4 && bv.size <= 4) {
            unsigned __int128 g = gcd_u128(mag128(av), mag128(bv));
            return from_u128(g, 1);
        }
        std::vector<std::uint32_t> x = av.limbs(), y = bv.limbs();
        bool both_zero = x.empty() && y.empty();
        return make(both_zero ? 0 : 1, gcd_mag(std::move(x), std::move(y)));
    }

    std::string to_string() const {
        if (!big_) return std::to_string(small_);
        std::vector<std::uint32_t> limbs = big_->limbs;
        std::string out;
        while (!limbs.empty()) {
            std::uint64_t rem = 0;
            for (std::size_t i = limbs.size(); i-- > 0;) {
                std::uint64_t cur = (rem << 32) | limbs[i];
                limbs[i] = static_cast<std::uint32_t>(cur / 1000000000ull);
                rem = cur % 1000000000ull;
            }
            while (!limbs.empty() && limbs.back() == 0) limbs.pop_back();
            std::string chunk = std::to_string(rem);
            if (!limbs.empty()) chunk.insert(0, 9 - chunk.size(), '0');
            out.insert(0, chunk);
        }
        if (out.empty()) out = "0";
        if (big_->sign < 0) out.insert(0, 1, '-');
        return out;
    }

private:
    struct Mag {
        int sign;  // never 0 when stored
        std::vector<std::uint32_t> limbs;  // little-endian, no leading zeros
    };

    struct View {
        int sign;
        const std::uint32_t* data;
        std::size_t size;
        std::uint32_t inline_limbs[2];
        std::vector<std::uint32_t> limbs() const { return {data, data + size}; }
    };

    static constexpr std::int64_t kMaxI64 = std::numeric_limits<std::int64_t>::max();
    static constexpr std::int64_t kMinI64 = std::numeric_limits<std::int64_t>::min();

    std::int64_t small_ = 0;
    std::shared_ptr<const Mag> big_;  // null => value is small_

    static std::uint64_t mag64(std::int64_t v) {
        return v < 0 ? static_cast<std::uint64_t>(~v) + 1u : static_cast<std::uint64_t>(v);
    }

    static unsigned __int128 gcd_u128(unsigned __int128 a, unsigned __int128 b) {
        while (b != 0) {
            unsigned __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static unsigned __int128 mag128(const View& v) {
        unsigned __int128 m = 0;
        for (std::size_t i = v.size; i-- > 0;) m = (m << 32) | v.data[i];
        return m;
    }

    static BigInt from_u128(unsigned __int128 mag, int sign) {
        if (mag == 0) return BigInt();
        if (sign >= 0 && mag <= static_cast<unsigned __int128>(kMaxI64))
            return BigInt(static_cast<std::int64_t>(mag));
        if (sign < 0 && mag <= static_cast<unsigned __int128>(kMaxI64) + 1u) {
            BigInt r;
            r.small_ = static_cast<std::int64_t>(-static_cast<__int128>(mag));
            return r;
        }
        std::vector<std::uint32_t> limbs;
        while (mag != 0) {
            limbs.push_back(static_cast<std::uint32_t>(mag & 0xffffffffu));
            mag >>= 32;
        }
        BigInt r;
        r.big_ = std::make_shared<const Mag>(Mag{sign < 0 ? -1 : 1, std::move(limbs)});
        return r;
    }

    View view() const {
        View v{};
        if (big_) {
            v.sign = big_->sign;
            v.data = big_->limbs.data();
            v.size = big_->limbs.size();
            return v;
        }
        std::uint64_t m = mag64(small_);
        v.sign = small_ < 0 ? -1 : (small_ > 0 ? 1 : 0);
        v.inline_limbs[0] = static_cast<std::uint32_t>(m & 0xffffffffu);
        v.inline_limbs[1] = static_cast<std::uint32_t>(m >> 32);
        v.data = v.inline_limbs;
        v.size = v.inline_limbs[1] ? 2 : (v.inline_limbs[0] ? 1 : 0);
        return v;
    }

    static BigInt make(int sign, std::vector<std::uint32_t> limbs) {
        while (!limbs.empty() && limbs.back() == 0) limbs.pop_back();
        if (limbs.empty()) return BigInt();
        if (limbs.size() <= 2) {
            std::uint64_t m = limbs[0];
            if (limbs.size() == 2) m |= static_cast<std::uint64_t>(limbs[1]) << 32;
            if (sign > 0 && m <= static_cast<std::uint64_t>(kMaxI64)) {
                BigInt r;
                r.small_ = static_cast<std::int64_t>(m);
                return r;
            }
            if (sign < 0 && m <= static_cast<std::uint64_t>(kMaxI64) + 1u) {
                BigInt r;
                r.small_ = static_cast<std::int64_t>(-static_cast<__int128>(m));
                return r;
            }
        }
        BigInt r;
        r.big_ = std::make_shared<const Mag>(Mag{sign, std::move(limbs)});
        return r;
    }

    static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
        if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
        for (std::size_t i = a.size(); i-- > 0;)
            if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
        return 0;
    }

    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> r(std::max(a.size(), b.size()) + 1, 0);
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::uint64_t s = carry;
            if (i < a.size()) s += a[i];
            if (i < b.size()) s += b[i];
            r[i] = static_cast<std::uint32_t>(s & 0xffffffffu);
            carry = s >> 32;
        }
        return r;
    }

    // requires a >= b
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> r(a.size(), 0);
        std::int64_t borrow = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::int64_t d = static_cast<std::int64_t>(a[i]) - borrow - (i < b.size() ? b[i] : 0u);
            if (d < 0) {
                d += (1ll << 32);
                borrow = 1;
            } else {
                borrow = 0;
            }
            r[i] = static_cast<std::uint32_t>(d);
        }
        assert(borrow == 0);
        return r;
    }

    static std::vector<std::uint32_t> mul_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> r(a.size() + b.size(), 0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::uint64_t carry = 0;
            for (std::size_t j = 0; j < b.size(); ++j) {
                std::uint64_t cur = static_cast<std::uint64_t>(a[i]) * b[j] + r[i + j] + carry;
                r[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffu);
                carry = cur >> 32;
            }
            r[i + b.size()] = static_cast<std::uint32_t>(carry);
        }
        return r;
    }

    static BigInt add_signed(const View& a, const View& b) {
        if (a.sign == 0) return make(b.sign, b.limbs());
        if (b.sign == 0) return make(a.sign, a.limbs());
        std::vector<std::uint32_t> am = a.limbs(), bm = b.limbs();
        if (a.sign == b.sign) return make(a.sign, add_mag(am, bm));
        int c = cmp_mag(am, bm);
        if (c == 0) return BigInt();
        if (c > 0) return make(a.sign, sub_mag(am, bm));
        return make(b.sign, sub_mag(bm, am));
    }

    static int bit_length(const std::vector<std::uint32_t>& m) {
        if (m.empty()) return 0;
        std::uint32_t top = m.back();
        int bits = 0;
        while (top) {
            ++bits;
            top >>= 1;
        }
        return bits + static_cast<int>(m.size() - 1) * 32;
    }

    static void shl1(std::vector<std::uint32_t>& m) {
        std::uint32_t carry = 0;
        for (auto& limb : m) {
            std::uint32_t next = limb >> 31;
            limb = (limb << 1) | carry;
            carry = next;
        }
        if (carry) m.push_back(carry);
    }

    static void set_bit(std::vector<std::uint32_t>& m, int bit) {
        std::size_t limb = static_cast<std::size_t>(bit) / 32;
        if (m.size() <= limb) m.resize(limb + 1, 0);
        m[limb] |= (1u << (bit % 32));
    }

    static bool get_bit(const std::vector<std::uint32_t>& m, int bit) {
        std::size_t limb = static_cast<std::size_t>(bit) / 32;
        if (limb >= m.size()) return false;
        return (m[limb] >> (bit % 32)) & 1u;
    }

    // Binary long division on magnitudes: slow but simple, and division is off
    // the hot path (normalization uses gcd, which never divides).
    static std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> divmod_mag(
        const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
        assert(!b.empty());
        if (cmp_mag(a, b) < 0) return {{}, a};
        std::vector<std::uint32_t> q, rem;
        int bits = bit_length(a);
        for (int i = bits - 1; i >= 0; --i) {
            shl1(rem);
            if (get_bit(a, i)) {
                if (rem.empty()) rem.push_back(1);
                else rem[0] |= 1u;
            }
            if (cmp_mag(rem, b) >= 0) {
                rem = sub_mag(rem, b);
                while (!rem.empty() && rem.back() == 0) rem.pop_back();
                set_bit(q, i);
            }
        }
        while (!rem.empty() && rem.back() == 0) rem.pop_back();
        return {q, rem};
    }

    static void shr1(std::vector<std::uint32_t>& m) {
        std::uint32_t carry = 0;
        for (std::size_t i = m.size(); i-- > 0;) {
            std::uint32_t next = m[i] & 1u;
            m[i] = (m[i] >> 1) | (carry << 31);
            carry = next;
        }
        while (!m.empty() && m.back() == 0) m.pop_back();
    }

    static bool is_even(const std::vector<std::uint32_t>& m) {
        return m.empty() || (m[0] & 1u) == 0;
    }

    static std::vector<std::uint32_t> gcd_mag(std::vector<std::uint32_t> a,
                                              std::vector<std::uint32_t> b) {
        if (a.empty()) return b;
        if (b.empty()) return a;
        int shift = 0;
        while (is_even(a) && is_even(b)) {
            shr1(a);
            shr1(b);
            ++shift;
        }
        while (is_even(a)) shr1(a);
        while (!b.empty()) {
            while (is_even(b)) shr1(b);
            if (cmp_mag(a, b) > 0) std::swap(a, b);
            b = sub_mag(b, a);
            while (!b.empty() && b.back() == 0) b.pop_back();
        }
        for (int i = 0; i < shift; ++i) shl1(a);
        return a;
    }
};

}  // namespace nn2flow
