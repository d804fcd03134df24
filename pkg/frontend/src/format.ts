// Coordinate canonicalization, mirroring the server bit-for-bit.
//
// The server quantizes coordinates to two decimals with banker's rounding
// applied to the *shortest decimal representation* of the double.
// Number.prototype.toString() produces exactly that representation, so we
// round its digit string by hand and return cents / 100. Both sides start
// from the same string, so the results agree for every finite input.

export function canonicalCoord(value: number): number {
  if (!Number.isFinite(value)) {
    throw new Error(`coordinate must be finite, got ${value}`);
  }
  return Number(centsOf(value.toString())) / 100;
}

// Two-decimal display string. Safe on canonical values: cents/100 is always
// within half an ulp of the exact decimal, so toFixed(2) recovers the cents.
export function formatCoord(value: number): string {
  return canonicalCoord(value).toFixed(2);
}

function centsOf(repr: string): bigint {
  let s = repr;
  let negative = false;
  if (s.startsWith("-")) {
    negative = true;
    s = s.slice(1);
  }
  let exponent = 0;
  const e = s.indexOf("e");
  if (e >= 0) {
    exponent = Number(s.slice(e + 1));
    s = s.slice(0, e);
  }
  const dot = s.indexOf(".");
  let digits = dot >= 0 ? s.slice(0, dot) + s.slice(dot + 1) : s;
  const pointAt = (dot >= 0 ? dot : s.length) + exponent;

  // cents = digits * 10^(pointAt + 2 - digits.length), rounded half-to-even
  let keep = pointAt + 2;
  if (keep < 0) {
    digits = "0".repeat(-keep) + digits;
    keep = 0;
  }

  let cents: bigint;
  if (keep >= digits.length) {
    cents = BigInt(digits + "0".repeat(keep - digits.length));
  } else {
    const head = digits.slice(0, keep);
    const tail = digits.slice(keep);
    cents = head === "" ? 0n : BigInt(head);
    const first = tail.charCodeAt(0) - 48;
    const restNonZero = /[1-9]/.test(tail.slice(1));
    const lastKept = keep === 0 ? 0 : digits.charCodeAt(keep - 1) - 48;
    if (first > 5 || (first === 5 && (restNonZero || lastKept % 2 === 1))) {
      cents += 1n;
    }
  }
  return negative ? -cents : cents;
}
