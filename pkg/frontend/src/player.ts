/** Video preview: a <video> element with the caption track pointed at the
 * job's VTT artifact. The browser renders the captions; nothing here parses
 * or reformats subtitle data. */

export function mountPlayer(
  container: HTMLElement,
  videoUrl: string,
  captionsUrl: string | null,
): HTMLVideoElement {
  container.innerHTML = "";
  const video = document.createElement("video");
  video.controls = true;
  video.preload = "metadata";
  video.src = videoUrl;
  if (captionsUrl !== null) {
    const track = document.createElement("track");
    track.kind = "captions";
    track.label = "English";
    track.srclang = "en";
    track.src = captionsUrl;
    track.default = true;
    video.appendChild(track);
  }
  container.appendChild(video);
  return video;
}

export function seekTo(video: HTMLVideoElement | null, start: number): void {
  if (video === null) return;
  video.currentTime = start;
  void video.play().catch(() => {
    // autoplay restrictions: seeking alone is fine
  });
}
