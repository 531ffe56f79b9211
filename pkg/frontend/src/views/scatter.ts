import { Ctx } from '../context';
import { el } from '../dom';
import { Pt, Transform, centerOn, fitTransform, nearest, thin } from '../scatter-math';
import { reportError } from '../toast';

const WIDTH = 520;
const HEIGHT = 420;
// Corpus-scale point clouds stay interactive through grid thinning.
const MAX_VISIBLE = 20000;

export interface ScatterView {
  ready: Promise<void>;
  pointCount: () => number;
  visibleCount: () => number;
  /** Hit-test in canvas coordinates; exposed for scripted tests. */
  hitAt: (x: number, y: number) => Pt | null;
}

export function mountScatter(root: HTMLElement, ctx: Ctx): ScatterView {
  const { api, store } = ctx;
  const canvas = el('canvas', { width: String(WIDTH), height: String(HEIGHT), class: 'map' });
  const tooltip = el('div', { class: 'tooltip hidden' });
  root.append(canvas, tooltip);

  let loadedSpace = '';
  let points: Pt[] = [];
  let visible: Pt[] = [];
  let transform: Transform = fitTransform([], WIDTH, HEIGHT);
  const titles = new Map<string, string>();

  function updateGeometry(): void {
    const state = store.state;
    const keep = new Set([...state.selectedIds, ...state.highlightedIds]);
    visible = thin(points, keep, MAX_VISIBLE);
    transform = fitTransform(points, WIDTH, HEIGHT);
    if (state.focusId) {
      const focus = points.find((p) => p.id === state.focusId);
      if (focus) transform = centerOn(transform, focus, WIDTH, HEIGHT);
    }
  }

  function draw(): void {
    updateGeometry();
    let context: CanvasRenderingContext2D | null = null;
    try {
      context = canvas.getContext('2d');
    } catch {
      context = null; // headless test environment has no raster backend
    }
    if (!context) return;
    const state = store.state;
    const selected = new Set(state.selectedIds);
    const highlighted = new Set(state.highlightedIds);
    context.clearRect(0, 0, WIDTH, HEIGHT);
    for (const p of visible) {
      const [x, y] = [transform.scale * p.x + transform.tx, transform.scale * p.y + transform.ty];
      if (selected.has(p.id)) {
        context.fillStyle = '#1565c0';
      } else if (highlighted.has(p.id)) {
        context.fillStyle = '#ef6c00';
      } else {
        context.fillStyle = '#9e9e9e';
      }
      const r = selected.has(p.id) || highlighted.has(p.id) ? 4 : 2;
      context.beginPath();
      context.arc(x, y, r, 0, 2 * Math.PI);
      context.fill();
    }
  }

  async function load(): Promise<void> {
    const name = store.state.space;
    try {
      const response = await api.projection(name);
      loadedSpace = response.space;
      points = response.points.map((p) => ({ id: p.id, x: p.x, y: p.y }));
      store.dispatch({ kind: 'know', ids: points.map((p) => p.id) });
      draw();
    } catch (error) {
      reportError(error);
    }
  }

  function canvasPosition(event: MouseEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    return [event.clientX - rect.left, event.clientY - rect.top];
  }

  canvas.addEventListener('mousemove', (event) => {
    const [x, y] = canvasPosition(event);
    const hit = nearest(visible, transform, x, y);
    if (!hit) {
      tooltip.classList.add('hidden');
      return;
    }
    tooltip.classList.remove('hidden');
    tooltip.style.left = `${x + 12}px`;
    tooltip.style.top = `${y + 12}px`;
    const cached = titles.get(hit.id);
    tooltip.textContent = cached ?? hit.id;
    if (cached === undefined) {
      void api
        .paper(hit.id)
        .then((paper) => {
          titles.set(hit.id, paper.title);
          if (tooltip.textContent === hit.id) tooltip.textContent = paper.title;
        })
        .catch(() => titles.set(hit.id, hit.id));
    }
  });

  canvas.addEventListener('click', (event) => {
    const [x, y] = canvasPosition(event);
    const hit = nearest(visible, transform, x, y);
    if (hit) store.dispatch({ kind: 'toggle-selected', id: hit.id });
  });

  store.subscribe((state) => {
    if (state.space !== loadedSpace) {
      void load();
    } else {
      draw();
    }
  });

  const ready = load();
  return {
    ready,
    pointCount: () => points.length,
    visibleCount: () => {
      updateGeometry();
      return visible.length;
    },
    hitAt: (x, y) => {
      updateGeometry();
      return nearest(visible, transform, x, y);
    },
  };
}
