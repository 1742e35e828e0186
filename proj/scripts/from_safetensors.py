#!/usr/bin/env python3
"""Convert a safetensors file into the uqinit tensor container.

The layouts are intentionally close; this shim re-encodes unsupported
dtypes to F32/F64, canonicalizes the header, and optionally renames one
tensor to the `weights` name the CLI looks for.

Usage:
    from_safetensors.py input.safetensors output.uq [--weights NAME]
                        [--f64] [--keep NAME ...]

Only numpy is required.
"""

import argparse
import json
import struct
import sys

import numpy as np

_DTYPES = {
    "F64": np.float64,
    "F32": np.float32,
    "F16": np.float16,
    "BF16": None,  # handled separately
    "I64": np.int64,
    "I32": np.int32,
    "I16": np.int16,
    "I8": np.int8,
    "U8": np.uint8,
}


def read_safetensors(path):
    with open(path, "rb") as f:
        header_len = struct.unpack("<Q", f.read(8))[0]
        header = json.loads(f.read(header_len))
        payload = f.read()
    tensors = {}
    for name, entry in header.items():
        if name == "__metadata__":
            continue
        begin, end = entry["data_offsets"]
        raw = payload[begin:end]
        dtype = entry["dtype"]
        if dtype == "BF16":
            u16 = np.frombuffer(raw, dtype=np.uint16).astype(np.uint32) << 16
            arr = u16.view(np.float32)
        elif dtype in _DTYPES:
            arr = np.frombuffer(raw, dtype=_DTYPES[dtype])
        else:
            raise SystemExit(f"unsupported dtype {dtype} for tensor {name}")
        tensors[name] = np.array(arr, dtype=np.float64).reshape(entry["shape"])
    return tensors, header.get("__metadata__", {})


def write_container(path, tensors, metadata, use_f64):
    header = {}
    if metadata:
        header["__metadata__"] = {str(k): str(v) for k, v in metadata.items()}
    payload = b""
    np_dtype = "<f8" if use_f64 else "<f4"
    dtype_name = "F64" if use_f64 else "F32"
    for name in sorted(tensors):
        data = np.ascontiguousarray(tensors[name], dtype=np_dtype).tobytes()
        header[name] = {
            "dtype": dtype_name,
            "shape": list(tensors[name].shape),
            "data_offsets": [len(payload), len(payload) + len(data)],
        }
        payload += data
    text = json.dumps(header, separators=(",", ":"), sort_keys=True).encode()
    text += b" " * ((8 - len(text) % 8) % 8)
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(text)))
        f.write(text)
        f.write(payload)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--weights", help="rename this tensor to 'weights'")
    ap.add_argument("--f64", action="store_true", help="store as F64 (default F32)")
    ap.add_argument("--keep", nargs="*", help="copy only these tensors")
    args = ap.parse_args()

    tensors, metadata = read_safetensors(args.input)
    if args.keep:
        missing = [n for n in args.keep if n not in tensors]
        if missing:
            raise SystemExit(f"tensors not found: {', '.join(missing)}")
        tensors = {n: tensors[n] for n in args.keep}
    if args.weights:
        if args.weights not in tensors:
            raise SystemExit(f"tensor not found: {args.weights}")
        tensors["weights"] = tensors.pop(args.weights)
    write_container(args.output, tensors, metadata, args.f64)
    print(f"wrote {args.output}: {', '.join(sorted(tensors))}")


if __name__ == "__main__":
    sys.exit(main())
