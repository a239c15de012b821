/**
 * Payload sanitizer: the blinding boundary of the client.
 *
 * Every payload from the server passes through here before touching any
 * client state or the DOM. Only the whitelisted fields survive; anything
 * else (whatever it is) is dropped on the floor, so a misbehaving or
 * compromised server cannot leak ground truth into the client.
 */
const URL_PATTERN = /^\/images\/[A-Za-z0-9._-]+$/;
function asString(value, field) {
    if (typeof value !== "string" || value.length === 0) {
        throw new Error(`malformed payload: ${field}`);
    }
    return value;
}
function asCount(value, field) {
    if (typeof value !== "number" || !Number.isFinite(value) || value < 0) {
        throw new Error(`malformed payload: ${field}`);
    }
    return value;
}
function asImageUrl(value, field) {
    const url = asString(value, field);
    if (!URL_PATTERN.test(url)) {
        throw new Error(`malformed payload: ${field} is not an opaque image URL`);
    }
    return url;
}
/** Whitelist-copy a /next response; unknown fields never survive. */
export function sanitizeNext(raw) {
    if (typeof raw !== "object" || raw === null) {
        throw new Error("malformed payload: not an object");
    }
    const record = raw;
    if (record.done === true) {
        const done = {
            done: true,
            index: asCount(record.index, "index"),
            total: asCount(record.total, "total"),
        };
        return done;
    }
    const item = {
        item_id: asString(record.item_id, "item_id"),
        left_url: asImageUrl(record.left_url, "left_url"),
        right_url: asImageUrl(record.right_url, "right_url"),
        index: asCount(record.index, "index"),
        total: asCount(record.total, "total"),
    };
    return item;
}
