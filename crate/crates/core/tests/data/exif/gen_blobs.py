#!/usr/bin/env python3
"""Writes the EXIF fixtures in this directory.

Each blob is laid out byte by byte from the TIFF 6.0 / EXIF 2.3 structure:
8-byte header, IFD0, Exif sub-IFD, then a data area for values that do not
fit in the 4-byte value field. Run from this directory; output is stable.
"""
import struct

ASCII, LONG, RATIONAL = 2, 4, 5
MAKE, MODEL, EXPOSURE, FNUMBER, EXIF_PTR, FOCAL = 0x010F, 0x0110, 0x829A, 0x829D, 0x8769, 0x920A


def tiff(order, ifd0, exif):
    """ifd0/exif: lists of (tag, kind, python value). Returns bytes."""
    e = "<" if order == "II" else ">"
    n0 = len(ifd0) + (1 if exif else 0)
    ifd0_off = 8
    exif_off = ifd0_off + 2 + 12 * n0 + 4
    data_off = exif_off + (2 + 12 * len(exif) + 4 if exif else 0)
    data = bytearray()

    def entry(tag, kind, value):
        nonlocal data
        if kind == ASCII:
            raw = value.encode() + b"\0"
            count = len(raw)
        elif kind == RATIONAL:
            raw = struct.pack(e + "II", *value)
            count = 1
        else:
            raw = struct.pack(e + "I", value)
            count = 1
        if len(raw) <= 4:
            field = raw.ljust(4, b"\0")
        else:
            field = struct.pack(e + "I", data_off + len(data))
            data += raw
            if len(data) % 2:
                data += b"\0"
        return struct.pack(e + "HHI", tag, kind, count) + field

    out = bytearray(order.encode() + struct.pack(e + "HI", 42, ifd0_off))
    entries = [entry(t, k, v) for t, k, v in ifd0]
    if exif:
        entries.append(struct.pack(e + "HHII", EXIF_PTR, LONG, 1, exif_off))
    out += struct.pack(e + "H", n0) + b"".join(entries) + struct.pack(e + "I", 0)
    if exif:
        ex = [entry(t, k, v) for t, k, v in exif]
        out += struct.pack(e + "H", len(exif)) + b"".join(ex) + struct.pack(e + "I", 0)
    assert len(out) == data_off
    return bytes(out + data)


def jpeg(tiff_bytes, app1=True):
    out = b"\xff\xd8"
    out += b"\xff\xe0" + struct.pack(">H", 16) + b"JFIF\0\x01\x01\0\0\x01\0\x01\0\0"
    if app1:
        payload = b"Exif\0\0" + tiff_bytes
        out += b"\xff\xe1" + struct.pack(">H", len(payload) + 2) + payload
    out += b"\xff\xdb" + struct.pack(">H", 4) + b"\0\0"
    out += b"\xff\xda" + struct.pack(">H", 2) + b"\x12\x34" + b"\xff\xd9"
    return out


CANON_IFD0 = [(MAKE, ASCII, "Canon"), (MODEL, ASCII, "EOS R5")]
CANON_EXIF = [(EXPOSURE, RATIONAL, (1, 200)), (FNUMBER, RATIONAL, (9, 5)), (FOCAL, RATIONAL, (50, 1))]

blobs = {
    "ii_full.tif": tiff("II", CANON_IFD0, CANON_EXIF),
    "mm_full.tif": tiff("MM", CANON_IFD0, CANON_EXIF),
    "ii_full.jpg": jpeg(tiff("II", CANON_IFD0, CANON_EXIF)),
    "ii_fnumber_only.tif": tiff("II", [], [(FNUMBER, RATIONAL, (9, 5))]),
    "no_app1.jpg": jpeg(b"", app1=False),
    "ii_deep.tif": tiff(
        "II",
        [(MAKE, ASCII, "NIKON CORPORATION"), (MODEL, ASCII, "D850")],
        [(EXPOSURE, RATIONAL, (1, 20)), (FNUMBER, RATIONAL, (11, 1)), (FOCAL, RATIONAL, (24, 1))],
    ),
    "mm_phone.jpg": jpeg(
        tiff(
            "MM",
            [(MAKE, ASCII, "Apple"), (MODEL, ASCII, "iPhone 15 Pro")],
            [(EXPOSURE, RATIONAL, (1, 60)), (FNUMBER, RATIONAL, (56, 10)), (FOCAL, RATIONAL, (686, 100))],
        )
    ),
    "mm_long_exposure.tif": tiff(
        "MM",
        [(MAKE, ASCII, "FUJIFILM")],
        [(EXPOSURE, RATIONAL, (1, 2)), (FNUMBER, RATIONAL, (11, 1)), (FOCAL, RATIONAL, (35, 1))],
    ),
}

# Corruptions of the valid little-endian blob.
bad = bytearray(blobs["ii_full.tif"])
bad[4:8] = struct.pack("<I", len(bad) + 100)
blobs["bad_ifd_offset.tif"] = bytes(bad)

bad = bytearray(blobs["mm_full.tif"])
bad[8:10] = struct.pack(">H", 200)
blobs["bad_entry_count.tif"] = bytes(bad)

blobs["zero_denominator.tif"] = tiff("II", [], [(FNUMBER, RATIONAL, (9, 0))])

full = blobs["ii_full.jpg"]
blobs["truncated_app1.jpg"] = full[: full.index(b"Exif") + 20]


def ok(n="", f="", t="", make="", model=""):
    return "\t".join(["ok", n, f, t, make, model])


# name -> ok<TAB>N<TAB>focal<TAB>exposure<TAB>make<TAB>model (rationals as num/den,
# absent fields empty), or err<TAB>code.
expected = {
    "ii_full.tif": ok("9/5", "50/1", "1/200", "Canon", "EOS R5"),
    "mm_full.tif": ok("9/5", "50/1", "1/200", "Canon", "EOS R5"),
    "ii_full.jpg": ok("9/5", "50/1", "1/200", "Canon", "EOS R5"),
    "ii_fnumber_only.tif": ok("9/5"),
    "no_app1.jpg": ok(),
    "ii_deep.tif": ok("11/1", "24/1", "1/20", "NIKON CORPORATION", "D850"),
    "mm_phone.jpg": ok("56/10", "686/100", "1/60", "Apple", "iPhone 15 Pro"),
    "mm_long_exposure.tif": ok("11/1", "35/1", "1/2", "FUJIFILM"),
    "bad_ifd_offset.tif": "err\ttruncated_exif",
    "bad_entry_count.tif": "err\tmalformed_ifd",
    "zero_denominator.tif": "err\tzero_denominator",
    "truncated_app1.jpg": "err\ttruncated_exif",
}
assert expected.keys() == blobs.keys()

for name, data in blobs.items():
    with open(name, "wb") as f:
        f.write(data)
with open("expected.tsv", "w") as f:
    for name in blobs:
        f.write(f"{name}\t{expected[name]}\n")
print(len(blobs), "blobs")
