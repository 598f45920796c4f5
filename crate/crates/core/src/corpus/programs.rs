//! Base programs for the seeded-fault corpus, with the input ranges their
//! suites are drawn from.

pub struct BaseProgram {
    pub name: &'static str,
    pub source: &'static str,
    /// `(variable, low, high)`, inclusive, in read order.
    pub inputs: &'static [(&'static str, i64, i64)],
}

pub const BASE_PROGRAMS: &[BaseProgram] = &[
    BaseProgram {
        name: "triangle",
        inputs: &[("a", 0, 20), ("b", 0, 20), ("c", 0, 20)],
        source: "\
read(a, b, c);
kind = 0;
per = a + b + c;
valid = 1;
if (a <= 0 || b <= 0 || c <= 0) {
    valid = 0;
}
if (a + b <= c) {
    valid = 0;
}
if (a + c <= b) {
    valid = 0;
}
if (b + c <= a) {
    valid = 0;
}
if (valid == 1) {
    if (a == b && b == c) {
        kind = 3;
    } else {
        if (a == b || b == c || a == c) {
            kind = 2;
        } else {
            kind = 1;
        }
    }
    big = a;
    if (b > big) {
        big = b;
    }
    if (c > big) {
        big = c;
    }
    small = a;
    if (b < small) {
        small = b;
    }
    if (c < small) {
        small = c;
    }
    mid = per - big - small;
    sq = big * big;
    legs = small * small + mid * mid;
    if (sq == legs) {
        kind = kind + 10;
    } else {
        if (sq > legs) {
            kind = kind + 20;
        }
    }
} else {
    per = 0;
}
print(kind);
print(per);
",
    },
    BaseProgram {
        name: "gcd",
        inputs: &[("a", 1, 60), ("b", 1, 60)],
        source: "\
read(a, b);
x = a;
y = b;
if (x < 0) {
    x = 0 - x;
}
if (y < 0) {
    y = 0 - y;
}
steps = 0;
while (y != 0) {
    t = x - (x / y) * y;
    x = y;
    y = t;
    steps = steps + 1;
}
g = x;
l = 0;
if (g != 0) {
    l = (a / g) * b;
}
if (l < 0) {
    l = 0 - l;
}
coprime = 0;
if (g == 1) {
    coprime = 1;
}
sa = 0;
d = 1;
while (d <= a) {
    if (a - (a / d) * d == 0) {
        sa = sa + d;
    }
    d = d + 1;
}
perfect = 0;
if (sa == 2 * a) {
    perfect = 1;
}
print(g);
print(l);
print(steps);
print(coprime + perfect * 2);
",
    },
    BaseProgram {
        name: "tax",
        inputs: &[
            ("income", 0, 8000),
            ("deductions", 0, 1500),
            ("status", 1, 3),
        ],
        source: "\
read(income, deductions, status);
taxable = income - deductions;
if (taxable < 0) {
    taxable = 0;
}
limit1 = 1000;
limit2 = 3000;
if (status == 2) {
    limit1 = 2000;
    limit2 = 6000;
}
if (status == 3) {
    limit1 = 1500;
    limit2 = 4500;
}
tax = 0;
if (taxable > limit2) {
    tax = tax + (taxable - limit2) * 30 / 100;
    taxable2 = limit2;
} else {
    taxable2 = taxable;
}
if (taxable2 > limit1) {
    tax = tax + (taxable2 - limit1) * 20 / 100;
    taxable1 = limit1;
} else {
    taxable1 = taxable2;
}
tax = tax + taxable1 * 10 / 100;
credit = 0;
if (income < 1200) {
    credit = 50;
    if (status == 2) {
        credit = 100;
    }
}
due = tax - credit;
refund = 0;
if (due < 0) {
    refund = 0 - due;
    due = 0;
}
rate = 0;
if (income > 0) {
    rate = tax * 100 / income;
}
bracket = 1;
if (taxable > limit1) {
    bracket = 2;
}
if (taxable > limit2) {
    bracket = 3;
}
print(due);
print(refund);
print(rate);
print(bracket);
",
    },
    BaseProgram {
        name: "dayofyear",
        inputs: &[("y", 1896, 2104), ("m", 0, 13), ("d", 0, 32)],
        source: "\
read(y, m, d);
leap = 0;
if (y - (y / 4) * 4 == 0) {
    leap = 1;
    if (y - (y / 100) * 100 == 0) {
        leap = 0;
        if (y - (y / 400) * 400 == 0) {
            leap = 1;
        }
    }
}
valid = 1;
if (m < 1 || m > 12) {
    valid = 0;
}
dim = 31;
if (m == 4 || m == 6 || m == 9 || m == 11) {
    dim = 30;
}
if (m == 2) {
    dim = 28 + leap;
}
if (d < 1 || d > dim) {
    valid = 0;
}
doy = 0;
if (valid == 1) {
    k = 1;
    while (k < m) {
        days = 31;
        if (k == 4 || k == 6 || k == 9 || k == 11) {
            days = 30;
        }
        if (k == 2) {
            days = 28 + leap;
        }
        doy = doy + days;
        k = k + 1;
    }
    doy = doy + d;
}
quarter = 0;
if (valid == 1) {
    quarter = (m - 1) / 3 + 1;
}
remaining = 0;
if (valid == 1) {
    remaining = 365 + leap - doy;
}
print(valid);
print(doy);
print(quarter);
print(remaining);
",
    },
    BaseProgram {
        name: "digits",
        inputs: &[("n", -5000, 50000)],
        source: "\
read(n);
neg = 0;
if (n < 0) {
    neg = 1;
    n = 0 - n;
}
m = n;
count = 0;
sum = 0;
rev = 0;
maxd = 0;
evens = 0;
if (m == 0) {
    count = 1;
}
while (m > 0) {
    dgt = m - (m / 10) * 10;
    sum = sum + dgt;
    rev = rev * 10 + dgt;
    if (dgt > maxd) {
        maxd = dgt;
    }
    if (dgt - (dgt / 2) * 2 == 0) {
        evens = evens + 1;
    }
    count = count + 1;
    m = m / 10;
}
pal = 0;
if (rev == n) {
    pal = 1;
}
root = sum;
while (root >= 10) {
    t = 0;
    while (root > 0) {
        t = t + root - (root / 10) * 10;
        root = root / 10;
    }
    root = t;
}
if (neg == 1) {
    rev = 0 - rev;
}
print(count);
print(sum);
print(rev);
print(maxd * 10 + evens);
print(pal + root * 2);
",
    },
    BaseProgram {
        name: "primes",
        inputs: &[("n", 1, 120), ("limit", 1, 60)],
        source: "\
read(n, limit);
isprime = 1;
if (n < 2) {
    isprime = 0;
}
k = 2;
while (k * k <= n && isprime == 1) {
    if (n - (n / k) * k == 0) {
        isprime = 0;
    }
    k = k + 1;
}
c = n;
steps = 0;
peak = c;
while (c > 1 && steps < limit) {
    if (c - (c / 2) * 2 == 0) {
        c = c / 2;
    } else {
        c = 3 * c + 1;
    }
    if (c > peak) {
        peak = c;
    }
    steps = steps + 1;
}
reached = 0;
if (c == 1) {
    reached = 1;
}
count = 0;
j = 2;
while (j <= n) {
    p = 1;
    q = 2;
    while (q * q <= j) {
        if (j - (j / q) * q == 0) {
            p = 0;
        }
        q = q + 1;
    }
    count = count + p;
    j = j + 1;
}
print(isprime);
print(steps);
print(peak);
print(reached);
print(count);
",
    },
    BaseProgram {
        name: "account",
        inputs: &[
            ("balance", 0, 5000),
            ("rate", 0, 20),
            ("years", 0, 15),
            ("withdraw", 0, 500),
        ],
        source: "\
read(balance, rate, years, withdraw);
year = 0;
interest_total = 0;
overdrawn = 0;
fees = 0;
while (year < years) {
    interest = balance * rate / 100;
    if (balance > 10000) {
        interest = interest + balance / 200;
    }
    balance = balance + interest;
    interest_total = interest_total + interest;
    if (withdraw > balance) {
        overdrawn = overdrawn + 1;
        fees = fees + 25;
        balance = balance - 25;
    } else {
        balance = balance - withdraw;
    }
    if (balance < 0) {
        balance = 0;
    }
    year = year + 1;
}
status = 0;
if (balance > 5000) {
    status = 2;
} else {
    if (balance > 1000) {
        status = 1;
    }
}
avg = 0;
if (years > 0) {
    avg = interest_total / years;
}
print(balance);
print(interest_total);
print(fees + overdrawn);
print(status * 1000 + avg);
",
    },
    BaseProgram {
        name: "grades",
        inputs: &[
            ("s1", 0, 100),
            ("s2", 0, 100),
            ("s3", 0, 100),
            ("bonus", 0, 10),
        ],
        source: "\
read(s1, s2, s3, bonus);
total = s1 + s2 + s3;
lowest = s1;
if (s2 < lowest) {
    lowest = s2;
}
if (s3 < lowest) {
    lowest = s3;
}
highest = s1;
if (s2 > highest) {
    highest = s2;
}
if (s3 > highest) {
    highest = s3;
}
best2 = total - lowest;
avg = best2 / 2 + bonus;
if (avg > 100) {
    avg = 100;
}
letter = 0;
if (avg >= 90) {
    letter = 4;
} else {
    if (avg >= 80) {
        letter = 3;
    } else {
        if (avg >= 70) {
            letter = 2;
        } else {
            if (avg >= 60) {
                letter = 1;
            }
        }
    }
}
spread = highest - lowest;
flag = 0;
if (spread > 40) {
    flag = 1;
}
if (lowest < 30 && letter > 2) {
    flag = flag + 2;
}
honors = 0;
if (letter == 4 && lowest >= 85) {
    honors = 1;
}
passed = 0;
count = 0;
if (s1 >= 60) {
    count = count + 1;
}
if (s2 >= 60) {
    count = count + 1;
}
if (s3 >= 60) {
    count = count + 1;
}
if (count >= 2) {
    passed = 1;
}
print(avg);
print(letter);
print(flag + honors * 4);
print(passed);
",
    },
    BaseProgram {
        name: "powmod",
        inputs: &[("x", 0, 10000), ("e", 0, 30), ("m", 1, 97)],
        source: "\
read(x, e, m);
lo = 0;
hi = x;
if (hi > 100) {
    hi = 100 + x / 100;
}
while (lo < hi) {
    mid = (lo + hi + 1) / 2;
    if (mid * mid <= x) {
        lo = mid;
    } else {
        hi = mid - 1;
    }
}
root = lo;
exact = 0;
if (root * root == x) {
    exact = 1;
}
result = 1;
base = x - (x / m) * m;
k = e;
while (k > 0) {
    if (k - (k / 2) * 2 == 1) {
        result = result * base;
        result = result - (result / m) * m;
    }
    base = base * base;
    base = base - (base / m) * m;
    k = k / 2;
}
if (m == 1) {
    result = 0;
}
order = 0;
if (base != 0) {
    p = 1;
    t = x - (x / m) * m;
    cur = t;
    while (cur != 1 && p < m && t != 0) {
        cur = cur * t;
        cur = cur - (cur / m) * m;
        p = p + 1;
    }
    if (cur == 1) {
        order = p;
    }
}
print(root);
print(exact);
print(result);
print(order);
",
    },
    BaseProgram {
        name: "multiples",
        inputs: &[("n", 1, 300), ("a", 1, 12), ("b", 1, 12)],
        source: "\
read(n, a, b);
ca = 0;
cb = 0;
both = 0;
neither = 0;
sum = 0;
i = 1;
while (i <= n) {
    ma = 0;
    mb = 0;
    if (i - (i / a) * a == 0) {
        ma = 1;
    }
    if (i - (i / b) * b == 0) {
        mb = 1;
    }
    if (ma == 1 && mb == 1) {
        both = both + 1;
    } else {
        if (ma == 1) {
            ca = ca + 1;
        } else {
            if (mb == 1) {
                cb = cb + 1;
            } else {
                neither = neither + 1;
                sum = sum + i;
            }
        }
    }
    i = i + 1;
}
g = a;
h = b;
while (h != 0) {
    r = g - (g / h) * h;
    g = h;
    h = r;
}
lcm = a / g * b;
expected_both = n / lcm;
ok = 0;
if (expected_both == both) {
    ok = 1;
}
print(ca);
print(cb);
print(both * 10 + ok);
print(neither);
print(sum);
",
    },
    BaseProgram {
        name: "shipping",
        inputs: &[
            ("weight", 0, 100),
            ("distance", 0, 3000),
            ("express", 0, 1),
            ("member", 0, 1),
        ],
        source: "\
read(weight, distance, express, member);
cost = 0;
zone = 1;
if (distance > 500) {
    zone = 2;
}
if (distance > 1500) {
    zone = 3;
}
base = 5;
if (weight > 1) {
    base = base + (weight - 1) * 2;
}
if (weight > 20) {
    base = base + (weight - 20) * 3;
}
cost = base * zone;
if (express == 1) {
    cost = cost + cost / 2;
    if (zone == 3) {
        cost = cost + 15;
    }
}
discount = 0;
if (member == 1) {
    discount = cost / 10;
    if (cost > 200) {
        discount = discount + 10;
    }
}
cost = cost - discount;
days = zone * 2;
if (express == 1) {
    days = days / 2;
    if (days < 1) {
        days = 1;
    }
}
heavy = 0;
if (weight > 50) {
    heavy = 1;
    days = days + 1;
}
if (weight <= 0) {
    cost = 0;
    days = 0;
}
free = 0;
if (cost > 300 && member == 1) {
    free = 1;
    cost = cost - 20;
}
print(cost);
print(days);
print(zone * 10 + heavy + free * 2);
",
    },
    BaseProgram {
        name: "bits",
        inputs: &[("n", 0, 100000), ("k", 0, 16)],
        source: "\
read(n, k);
v = n;
if (v < 0) {
    v = 0 - v;
}
ones = 0;
high = 0 - 1;
pos = 0;
runs = 0;
prev = 0;
longest = 0;
cur = 0;
while (v > 0) {
    bit = v - (v / 2) * 2;
    if (bit == 1) {
        ones = ones + 1;
        high = pos;
        cur = cur + 1;
        if (cur > longest) {
            longest = cur;
        }
        if (prev == 0) {
            runs = runs + 1;
        }
    } else {
        cur = 0;
    }
    prev = bit;
    v = v / 2;
    pos = pos + 1;
}
parity = ones - (ones / 2) * 2;
shifted = n;
j = 0;
while (j < k) {
    shifted = shifted / 2;
    j = j + 1;
}
kth = shifted - (shifted / 2) * 2;
pow2 = 0;
if (ones == 1) {
    pow2 = 1;
}
print(ones);
print(high);
print(parity + pow2 * 2 + kth * 4);
print(runs * 100 + longest);
",
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse;

    #[test]
    fn every_base_program_parses_within_size_bounds() {
        assert!(BASE_PROGRAMS.len() >= 10);
        for b in BASE_PROGRAMS {
            let p = parse(b.source).unwrap_or_else(|e| panic!("{}: {e}", b.name));
            assert!(
                (30..=80).contains(&p.len()),
                "{} has {} statements",
                b.name,
                p.len()
            );
            assert!(p.has_output());
        }
    }
}
