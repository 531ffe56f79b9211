// Chat replies arrive with grounded-citation markup:
//   [[cite:<paper_id>|**title**]]   resolved against the corpus
//   [[unverified|**title**]]        not found; shown with a warning badge

export interface TextSegment {
  kind: 'text';
  text: string;
}

export interface CiteSegment {
  kind: 'cite';
  paperId: string;
  surface: string;
}

export interface UnverifiedSegment {
  kind: 'unverified';
  surface: string;
}

export type Segment = TextSegment | CiteSegment | UnverifiedSegment;

const MARKUP = /\[\[(cite:[^|\]]+|unverified)\|((?:(?!\]\]).)*)\]\]/g;

export function parseMarkup(text: string): Segment[] {
  const segments: Segment[] = [];
  let cursor = 0;
  MARKUP.lastIndex = 0;
  for (let match = MARKUP.exec(text); match !== null; match = MARKUP.exec(text)) {
    if (match.index > cursor) {
      segments.push({ kind: 'text', text: text.slice(cursor, match.index) });
    }
    const head = match[1];
    const surface = match[2];
    if (head === 'unverified') {
      segments.push({ kind: 'unverified', surface });
    } else {
      segments.push({ kind: 'cite', paperId: head.slice('cite:'.length), surface });
    }
    cursor = match.index + match[0].length;
  }
  if (cursor < text.length) {
    segments.push({ kind: 'text', text: text.slice(cursor) });
  }
  return segments;
}

/** Citation surfaces keep their ** emphasis delimiters; drop them for display. */
export function displayTitle(surface: string): string {
  return surface.replace(/^\*\*/, '').replace(/\*\*$/, '');
}

/** Exact inverse of parseMarkup, used to check the parser loses nothing. */
export function renderSegments(segments: Segment[]): string {
  return segments
    .map((segment) => {
      switch (segment.kind) {
        case 'text':
          return segment.text;
        case 'cite':
          return `[[cite:${segment.paperId}|${segment.surface}]]`;
        case 'unverified':
          return `[[unverified|${segment.surface}]]`;
      }
    })
    .join('');
}
